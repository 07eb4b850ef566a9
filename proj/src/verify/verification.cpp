#include "verify/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "core/errors.hpp"

namespace levyopt {

void McAccumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

McEstimate McAccumulator::estimate(double target) const {
  McEstimate e;
  e.mean = mean_;
  e.n = n_;
  e.target = target;
  e.std_error = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  if (e.std_error > 0.0) {
    e.z_score = (e.mean - target) / e.std_error;
  } else {
    e.z_score = e.mean == target ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return e;
}

McEstimate mc_expectation(const PathSimulator& sim, std::uint64_t n_paths,
                          const std::function<double(const SimulatedPath&)>& g, double target) {
  McAccumulator acc;
  for (std::uint64_t i = 0; i < n_paths; ++i) acc.add(g(sim.path(i)));
  return acc.estimate(target);
}

MartingaleReport martingale_check(const PathSimulator& sim, int asset, std::uint64_t n_paths) {
  MartingaleReport rep;
  McAccumulator terminal;
  std::vector<McAccumulator> drift(sim.steps());
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    const auto p = sim.path(i);
    terminal.add(p.s(p.last(), asset));
    double s_prev = p.s(0, asset);
    for (std::size_t k = 1; k < p.nodes(); ++k) {
      if (p.regular[k] < 0) continue;
      const double s_now = p.s(k, asset);
      drift[p.regular[k] - 1].add(s_now / s_prev - 1.0);
      s_prev = s_now;
    }
  }
  rep.terminal = terminal.estimate(sim.spot()[asset]);
  for (const auto& d : drift) rep.drifts.push_back(d.estimate(0.0));
  return rep;
}

std::vector<double> RefinementStudy::ratios() const {
  std::vector<double> r;
  for (std::size_t k = 0; k + 1 < rms.size(); ++k) r.push_back(rms[k] / rms[k + 1]);
  return r;
}

bool RefinementStudy::decays(double factor) const {
  const auto r = ratios();
  return !r.empty() && std::all_of(r.begin(), r.end(), [&](double x) { return x >= factor; });
}

RefinementStudy terminal_identity_study(const StrategySolution& sol, const PathSimulator& sim,
                                        std::uint64_t n_paths, const std::vector<int>& strides) {
  RefinementStudy st;
  st.strides = strides;
  std::vector<double> sq(strides.size(), 0.0);
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    const auto p = sim.path(i);
    const double fp = sol.spec.fprime(sol.lambda * p.Z[p.last()]);
    for (std::size_t s = 0; s < strides.size(); ++s) {
      const double v = euler_terminal_wealth(sol, sol.coef, p, strides[s]);
      sq[s] += (v + fp) * (v + fp);
    }
  }
  for (std::size_t s = 0; s < strides.size(); ++s) {
    st.dt.push_back(sim.horizon() * strides[s] / sim.steps());
    st.rms.push_back(std::sqrt(sq[s] / static_cast<double>(n_paths)));
  }
  return st;
}

namespace {

// int H_t(x, y) Y(y) nu(dy) = x^{gamma+1} e^{(T-t) kappa} * factor (or factor
// alone on the gamma = -1 branch).
double compensator_factor(const StrategySolution& sol) {
  const auto& nu = sol.triplet.jumps;
  if (nu.empty()) return 0.0;
  const auto& ratio = sol.pair.ratio;
  const auto& spec = sol.spec;
  TailGrowth growth;
  if (nu.kind() == JumpMeasure::Kind::Density) {
    const double g1 = spec.log_branch() ? 1.0 : spec.gamma() + 2.0;
    growth = max(max(g1 * ratio.growth(), ratio.growth()), TailGrowth::bounded()) +
             TailGrowth{Growth::exponential(kLogSlack), Growth::exponential(kLogSlack)};
  }
  if (spec.log_branch()) {
    return spec.a() * integrate_jumps(nu, [&](std::span<const double> y) {
      const double L = ratio.log_value(y);
      return L * std::exp(L);
    }, growth);
  }
  const double g1 = spec.gamma() + 1.0;
  return spec.a() / g1 * integrate_jumps(nu, [&](std::span<const double> y) {
    const double L = ratio.log_value(y);
    return std::exp(L) * std::expm1(g1 * L);
  }, growth);
}

double compensator_rate(const StrategySolution& sol, double factor, double t, double x) {
  if (sol.spec.log_branch()) return factor;
  const double g1 = sol.spec.gamma() + 1.0;
  return factor * std::exp(g1 * std::log(x) + (sol.horizon - t) * sol.kappa_g1);
}

Vector continuous_q(const StrategySolution& sol, const SimulatedPath& p, std::size_t k) {
  Vector xc(p.dim);
  for (int i = 0; i < p.dim; ++i) xc[i] = p.xc(k, i);
  if (p.tag == MeasureTag::P) xc -= sol.triplet.gauss * sol.pair.beta * p.t[k];
  return xc;
}

}  // namespace

RepresentationReport representation_residual(const StrategySolution& sol,
                                             const PathSimulator& sim, std::uint64_t n_paths,
                                             const std::vector<int>& strides,
                                             const std::vector<double>& times) {
  RepresentationReport rep;
  rep.times = times;
  rep.overall.strides = strides;
  const double T = sim.horizon();
  const int m = sim.steps();
  std::vector<int> eval_index;
  for (double t : times) {
    const double pos = t / T * m;
    const int k = static_cast<int>(std::lround(pos));
    for (int s : strides) {
      if (k % s != 0 || std::abs(pos - k) > 1e-9) {
        throw ConfigError("representation_residual: evaluation time is not on every grid");
      }
    }
    eval_index.push_back(k);
  }
  const double factor = compensator_factor(sol);
  const double rho0 = solution_rho(sol, 0.0, 1.0);
  const auto& beta = sol.pair.beta;
  const double lam = sol.lambda;

  std::vector<std::vector<double>> sq(strides.size(), std::vector<double>(times.size(), 0.0));
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    const auto p = sim.path(i);
    for (std::size_t s = 0; s < strides.size(); ++s) {
      const auto nodes = stride_nodes(p, strides[s]);
      double rhs = rho0;
      rep.max_abs_at_zero =
          std::max(rep.max_abs_at_zero, std::abs(solution_rho(sol, 0.0, p.Z[0]) - rhs));
      Vector xc_prev = continuous_q(sol, p, nodes.front());
      for (std::size_t n = 1; n < nodes.size(); ++n) {
        const std::size_t kp = nodes[n - 1];
        const std::size_t k = nodes[n];
        const double tp = p.t[kp];
        const double x = lam * p.Z[kp];
        const Vector xc = continuous_q(sol, p, k);
        if (p.is_jump[k]) {
          const double h = H_closed_form(sol.spec, sol.pair.ratio, sol.kappa_g1, p.t[k], x,
                                         p.jump_at(k), T);
          rhs += h;
          if (s + 1 == strides.size()) {
            const double direct = solution_rho(sol, p.t[k], p.Z[k]) -
                                  solution_rho(sol, p.t[k], p.Z[kp]);
            rep.max_jump_error = std::max(rep.max_jump_error, std::abs(direct - h));
            ++rep.jumps_seen;
          }
        } else {
          const double dt = p.t[k] - tp;
          const double xi = xi_closed_form(sol.spec, sol.kappa_g1, tp, x, T);
          rhs += lam * p.Z[kp] * xi * beta.dot(xc - xc_prev);
          rhs -= dt * compensator_rate(sol, factor, tp, x);
        }
        xc_prev = xc;
        if (p.regular[k] >= 0) {
          for (std::size_t j = 0; j < eval_index.size(); ++j) {
            if (p.regular[k] == eval_index[j]) {
              const double r = solution_rho(sol, p.t[k], p.Z[k]) - rhs;
              sq[s][j] += r * r;
            }
          }
        }
      }
    }
  }
  for (std::size_t s = 0; s < strides.size(); ++s) {
    std::vector<double> row;
    double pooled = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      row.push_back(std::sqrt(sq[s][j] / static_cast<double>(n_paths)));
      pooled += sq[s][j];
    }
    rep.rms_at.push_back(row);
    rep.overall.dt.push_back(T * strides[s] / m);
    rep.overall.rms.push_back(
        std::sqrt(pooled / static_cast<double>(n_paths * std::max<std::size_t>(times.size(), 1))));
  }
  return rep;
}

ScalingArbiter arbitrate_scaling(const StrategySolution& sol, const PathSimulator& sim,
                                 std::uint64_t n_paths, int stride) {
  ScalingArbiter arb;
  arb.candidates.push_back({"gamma_constants", sol.coef, 0.0});
  arb.candidates.push_back({"beta", sol.pair.beta, 0.0});
  std::vector<double> sq(arb.candidates.size(), 0.0);
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    const auto p = sim.path(i);
    const auto nodes = stride_nodes(p, stride);
    for (std::size_t c = 0; c < arb.candidates.size(); ++c) {
      double v = sol.capital;
      for (std::size_t n = 1; n < nodes.size(); ++n) {
        const std::size_t kp = nodes[n - 1];
        const std::size_t k = nodes[n];
        Vector sp(p.dim), sn(p.dim);
        for (int d = 0; d < p.dim; ++d) {
          sp[d] = p.s(kp, d);
          sn[d] = p.s(k, d);
        }
        v += strategy_with_coef(sol, arb.candidates[c].coef, p.t[kp], p.Z[kp], sp).dot(sn - sp);
        const double r = v + solution_rho(sol, p.t[k], p.Z[k]);
        sq[c] += r * r;
        if (c == 0) ++count;
      }
    }
  }
  for (std::size_t c = 0; c < arb.candidates.size(); ++c) {
    arb.candidates[c].rms = std::sqrt(sq[c] / static_cast<double>(std::max<std::uint64_t>(count, 1)));
    if (arb.candidates[c].rms < arb.candidates[arb.selected].rms) arb.selected = c;
  }
  return arb;
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

PreservationReport levy_preservation_test(const PathSimulator& sim, std::uint64_t n_paths,
                                          int windows, double ramp) {
  if (windows < 2 || sim.steps() % windows != 0) {
    throw ConfigError("preservation test: grid steps must be a multiple of the window count");
  }
  PreservationReport rep;
  const double T = sim.horizon();
  const double h = T / windows;
  rep.window = h;
  const int per = sim.steps() / windows;
  std::vector<std::vector<double>> inc(windows);
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    const auto p = sim.path(i);
    std::vector<double> at(windows + 1, 0.0);
    for (std::size_t k = 0; k < p.nodes(); ++k) {
      if (p.regular[k] >= 0 && p.regular[k] % per == 0) {
        const double t = p.t[k];
        at[p.regular[k] / per] = p.x(k, 0) + ramp * t * t;
      }
    }
    // Quantised so that rounding noise cannot split ties of atomic laws.
    for (int w = 0; w < windows; ++w) inc[w].push_back(std::round((at[w + 1] - at[w]) * 1e12) / 1e12);
  }
  rep.stationarity = ks_two_sample(inc.front(), inc.back());

  const auto& u = inc[0];
  const auto& v = inc[1];
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    mu += u[k];
    mv += v[k];
  }
  mu /= n;
  mv /= n;
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    suv += (u[k] - mu) * (v[k] - mv);
    suu += (u[k] - mu) * (u[k] - mu);
    svv += (v[k] - mv) * (v[k] - mv);
  }
  rep.correlation = suu > 0.0 && svv > 0.0 ? suv / std::sqrt(suu * svv) : 0.0;
  const double z = std::atanh(std::clamp(rep.correlation, -0.999999, 0.999999)) * std::sqrt(n - 3.0);
  rep.correlation_p = std::erfc(std::abs(z) / std::sqrt(2.0));

  // Law of one increment from the simulating triplet.
  const auto& tr = sim.simulation_triplet();
  double mean_rate = tr.drift[0];
  double var_rate = tr.gauss(0, 0);
  if (!tr.jumps.empty()) {
    const TailGrowth slack{Growth::exponential(2 * kLogSlack), Growth::exponential(2 * kLogSlack)};
    mean_rate += integrate_jumps(tr.jumps, [](std::span<const double> y) {
      return truncation_weight(y) > 0.0 ? 0.0 : y[0];
    }, slack);
    var_rate += integrate_jumps(tr.jumps, [](std::span<const double> y) { return y[0] * y[0]; },
                                slack);
  }
  McAccumulator m1;
  for (double x : u) m1.add(x);
  rep.mean_increment = m1.estimate(mean_rate * h);
  double m4 = 0.0;
  for (double x : u) m4 += std::pow(x - m1.mean(), 4);
  m4 /= n;
  const double s2 = m1.variance();
  rep.var_increment.mean = s2;
  rep.var_increment.n = u.size();
  rep.var_increment.target = var_rate * h;
  rep.var_increment.std_error = std::sqrt(std::max(m4 - s2 * s2, 0.0) / n);
  rep.var_increment.z_score = rep.var_increment.std_error > 0.0
                                  ? (s2 - rep.var_increment.target) / rep.var_increment.std_error
                                  : 0.0;
  return rep;
}

bool DominanceTable::all_dominated() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const DominanceRow& r) { return !r.admissible || r.dominated; });
}

DominanceTable utility_dominance_scan(const StrategySolution& sol, const PathSimulator& sim,
                                      const std::vector<double>& proportions,
                                      std::uint64_t n_paths, int stride, const Vector* coef) {
  const auto& spec = sol.spec;
  const double floor = spec.wealth_floor();
  const Vector& c = coef ? *coef : sol.coef;
  const std::size_t np = proportions.size();
  McAccumulator opt;
  std::vector<McAccumulator> util(np), diff(np);
  std::vector<char> admissible(np, 1);
  bool opt_admissible = true;

  for (std::uint64_t i = 0; i < n_paths; ++i) {
    const auto p = sim.path(i);
    const auto nodes = stride_nodes(p, stride);
    const double v_hat = euler_terminal_wealth(sol, c, p, stride);
    double u_hat = -std::numeric_limits<double>::infinity();
    if (v_hat > floor) {
      u_hat = spec.utility(v_hat);
    } else {
      opt_admissible = false;
    }
    opt.add(u_hat);
    for (std::size_t j = 0; j < np; ++j) {
      double v = sol.capital;
      for (std::size_t n = 1; n < nodes.size() && v > floor; ++n) {
        const double r = p.s(nodes[n], 0) / p.s(nodes[n - 1], 0) - 1.0;
        v *= 1.0 + proportions[j] * r;
      }
      if (!(v > floor)) {
        admissible[j] = 0;
        continue;
      }
      const double u = spec.utility(v);
      util[j].add(u);
      diff[j].add(u_hat - u);
    }
  }

  DominanceTable table;
  table.optimal.label = "phi_hat";
  table.optimal.proportion = std::numeric_limits<double>::quiet_NaN();
  table.optimal.admissible = opt_admissible;
  table.optimal.utility = opt.estimate(0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < np; ++j) {
    DominanceRow row;
    char buf[48];
    std::snprintf(buf, sizeof buf, "pi=%.4f", proportions[j]);
    row.label = buf;
    row.proportion = proportions[j];
    row.admissible = admissible[j] != 0;
    if (row.admissible) {
      row.utility = util[j].estimate(0.0);
      const auto d = diff[j].estimate(0.0);
      row.paired_diff = d.mean;
      row.paired_se = d.std_error;
      row.dominated = opt_admissible && d.mean >= -3.0 * d.std_error;
      if (row.utility.mean > best) {
        best = row.utility.mean;
        table.best_proportion = row.proportion;
      }
    } else {
      row.dominated = true;
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<TruncationRow> truncation_study(const StrategySolution& sol, const PathSimulator& sim,
                                            const std::vector<double>& levels,
                                            std::uint64_t n_paths, int stride) {
  std::vector<McAccumulator> util(levels.size());
  std::vector<std::uint64_t> stopped(levels.size(), 0);
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    const auto p = sim.path(i);
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const auto out = truncated_strategy(sol, p, levels[j], stride);
      if (out.stopped_before_T) ++stopped[j];
      util[j].add(out.terminal_wealth > sol.spec.wealth_floor()
                      ? sol.spec.utility(out.terminal_wealth)
                      : -std::numeric_limits<double>::infinity());
    }
  }
  std::vector<TruncationRow> rows;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    rows.push_back({levels[j], static_cast<double>(stopped[j]) / static_cast<double>(n_paths),
                    util[j].estimate(0.0)});
  }
  return rows;
}

}  // namespace levyopt
