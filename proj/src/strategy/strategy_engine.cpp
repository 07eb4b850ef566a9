#include "strategy/strategy_engine.hpp"

#include <cmath>
#include <sstream>

#include "core/errors.hpp"

namespace levyopt {

double expected_inverse_marginal(const DivergenceSpec& spec, double lambda, double kappa_g1,
                                 double q_mean, double T) {
  const double rate = spec.log_branch() ? q_mean : kappa_g1;
  return -rho_closed_form(spec, lambda, rate, 0.0, 1.0, T);
}

double solve_lambda(const DivergenceSpec& spec, double kappa_g1, double q_mean, double x,
                    double T) {
  if (!(x > spec.wealth_floor()) || !(x < spec.wealth_ceiling())) {
    std::ostringstream os;
    os << "x below wealth floor: capital " << x << " outside (" << spec.wealth_floor()
       << ", " << spec.wealth_ceiling() << ")";
    throw DomainError(os.str());
  }
  if (!std::isfinite(kappa_g1) || !std::isfinite(q_mean)) {
    throw DivergentIntegralError("moment infinite: E_Q[Z_T^(gamma+1)] is not finite");
  }
  if (spec.log_branch()) {
    return std::exp((-x - spec.fprime_at_1()) / spec.a() - T * q_mean);
  }
  const double g1 = spec.gamma() + 1.0;
  const double bracket = -spec.alpha(x);
  if (!(bracket > 0.0)) throw DomainError("x below wealth floor: alpha(x) must be negative");
  return std::exp((std::log(bracket) - T * kappa_g1) / g1);
}

double solve_lambda_bisection(const DivergenceSpec& spec, double kappa_g1, double q_mean,
                              double x, double T) {
  // E_Q[-f'(lambda Z_T)] is decreasing in lambda.
  auto g = [&](double ll) {
    return expected_inverse_marginal(spec, std::exp(ll), kappa_g1, q_mean, T) - x;
  };
  double lo = -60.0;
  double hi = 60.0;
  if (!(g(lo) > 0.0) || !(g(hi) < 0.0)) {
    throw DomainError("lambda bisection: no sign change on [e^-60, e^60]");
  }
  for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

GammaConstants compute_gamma_constants(const LevyTriplet& triplet, const DivergenceSpec& spec,
                                       const GirsanovPair& pair, const Vector& y0) {
  if (!triplet.gauss.isZero(0.0)) {
    throw ConfigError("gamma constants belong to the c = 0 branch (gauss_c is nonzero)");
  }
  const int d = triplet.dim;
  if (y0.size() != d) throw ConfigError("y0 has wrong length");
  GammaConstants out;
  out.y0 = y0;
  const auto& nu = triplet.jumps;
  if (nu.kind() == JumpMeasure::Kind::Density) {
    const auto& shape = nu.density_shape();
    if (!(y0[0] > shape.lower() && y0[0] < shape.upper())) {
      throw DomainError("y0 outside the interior of supp(nu)");
    }
  } else if (nu.kind() == JumpMeasure::Kind::Atoms) {
    out.note = "supp(nu) is a finite set with empty interior; Y is evaluated through its "
               "analytic extension";
  } else {
    throw ConfigError("gamma constants need a nonzero jump measure");
  }
  const auto& ratio = pair.ratio;
  const std::span<const double> ys(y0.data(), y0.size());
  const double Y = ratio.value(ys);
  out.analytic = Vector(d);
  out.finite_difference = Vector(d);
  for (int i = 0; i < d; ++i) {
    const double scale = std::exp(-y0[i]) * std::pow(Y, spec.gamma());
    out.analytic[i] = scale * ratio.derivative(ys, i);
    const double h = 1e-5 * std::max(1.0, std::abs(y0[i]));
    Vector up = y0;
    Vector dn = y0;
    up[i] += h;
    dn[i] -= h;
    const double dY = (ratio.value(std::span<const double>(up.data(), d)) -
                       ratio.value(std::span<const double>(dn.data(), d))) /
                      (2.0 * h);
    out.finite_difference[i] = scale * dY;
  }
  out.discrepancy = (out.analytic - out.finite_difference).cwiseAbs().maxCoeff();
  return out;
}

StrategySolution make_strategy(const LevyTriplet& triplet, const DivergenceSpec& spec,
                               const GirsanovPair& pair, double capital, double T,
                               const Vector* y0) {
  StrategySolution sol{spec, pair, triplet, T, capital, 1.0, 0.0, 0.0,
                       StrategyBranch::Diffusive, pair.beta, {}};
  const DensityMomentCurve curve(triplet, pair.ratio, MeasureTag::Q);
  sol.kappa_g1 = curve.kappa(spec.gamma() + 1.0);
  sol.q_mean = curve.q_mean_rate();
  sol.lambda = solve_lambda(spec, sol.kappa_g1, sol.q_mean, capital, T);
  const double lb = solve_lambda_bisection(spec, sol.kappa_g1, sol.q_mean, capital, T);
  if (std::abs(lb - sol.lambda) > 1e-9 * sol.lambda) {
    sol.notes.push_back("lambda closed form and bisection differ: " + std::to_string(sol.lambda) +
                        " vs " + std::to_string(lb));
  }
  if (triplet.gauss.isZero(0.0) && !triplet.jumps.empty()) {
    sol.branch = StrategyBranch::PureJump;
    Vector y = Vector::Zero(triplet.dim);
    if (y0) {
      y = *y0;
    } else if (triplet.jumps.kind() == JumpMeasure::Kind::Atoms) {
      y = triplet.jumps.atom_list().front().location;
    }
    const auto gc = compute_gamma_constants(triplet, spec, pair, y);
    sol.coef = gc.analytic;
    if (!gc.note.empty()) sol.notes.push_back(gc.note);
  }
  return sol;
}

Vector strategy_with_coef(const StrategySolution& sol, const Vector& coef, double t,
                          double Z_minus, const Vector& S_minus) {
  const double lz = sol.lambda * Z_minus;
  const double xi = xi_closed_form(sol.spec, sol.kappa_g1, t, lz, sol.horizon);
  return (-sol.lambda * Z_minus * xi) * coef.cwiseQuotient(S_minus);
}

Vector strategy_at(const StrategySolution& sol, double t, double Z_minus, const Vector& S_minus,
                   StrategyForm form) {
  switch (form) {
    case StrategyForm::Theorem:
      return strategy_with_coef(sol, sol.coef, t, Z_minus, S_minus);
    case StrategyForm::Unified:
    case StrategyForm::Printed: {
      const auto& spec = sol.spec;
      const double alpha = spec.alpha(sol.capital);
      const double g1 = spec.gamma() + 1.0;
      const double scale = alpha * std::exp(g1 * std::log(Z_minus) - t * sol.kappa_g1);
      if (form == StrategyForm::Unified) {
        return (spec.a() * scale) * sol.coef.cwiseQuotient(S_minus);
      }
      return scale * sol.pair.beta.cwiseQuotient(S_minus);
    }
  }
  return Vector();
}

Vector strategy_at(const StrategySolution& sol, StrategyBranch expected, double t,
                   double Z_minus, const Vector& S_minus) {
  if (expected != sol.branch) {
    throw ConfigError(sol.branch == StrategyBranch::PureJump
                          ? "branch mismatch: c = 0 model has no diffusive branch"
                          : "branch mismatch: c != 0 model has no pure-jump branch");
  }
  return strategy_at(sol, t, Z_minus, S_minus);
}

double solution_rho(const StrategySolution& sol, double t, double x) {
  return rho_closed_form(sol.spec, sol.lambda, sol.rho_rate(), t, x, sol.horizon);
}

std::vector<std::size_t> stride_nodes(const SimulatedPath& path, int stride) {
  std::vector<std::size_t> out;
  out.reserve(path.nodes() / std::max(stride, 1) + 8);
  for (std::size_t k = 0; k < path.nodes(); ++k) {
    if (path.regular[k] < 0 || path.regular[k] % stride == 0 || k == path.last()) {
      out.push_back(k);
    }
  }
  return out;
}

namespace {

Vector node_prices(const SimulatedPath& p, std::size_t k) {
  Vector s(p.dim);
  for (int i = 0; i < p.dim; ++i) s[i] = p.s(k, i);
  return s;
}

}  // namespace

WealthSeries wealth_process(const StrategySolution& sol, const SimulatedPath& path, int stride) {
  WealthSeries w;
  const auto nodes = stride_nodes(path, stride);
  double v = sol.capital;
  Vector s_prev = node_prices(path, nodes.front());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const std::size_t k = nodes[n];
    const Vector s_now = node_prices(path, k);
    if (n > 0) {
      const std::size_t kp = nodes[n - 1];
      const Vector phi = strategy_at(sol, path.t[kp], path.Z[kp], s_prev);
      v += phi.dot(s_now - s_prev);
    }
    const double closed = -solution_rho(sol, path.t[k], path.Z[k]);
    w.t.push_back(path.t[k]);
    w.closed.push_back(closed);
    w.euler.push_back(v);
    w.residual.push_back(v - closed);
    w.node.push_back(k);
    s_prev = s_now;
  }
  w.terminal_identity =
      v + sol.spec.fprime(sol.lambda * path.Z[path.last()]);
  return w;
}

double euler_terminal_wealth(const StrategySolution& sol, const Vector& coef,
                             const SimulatedPath& path, int stride) {
  const auto nodes = stride_nodes(path, stride);
  double v = sol.capital;
  Vector s_prev = node_prices(path, nodes.front());
  for (std::size_t n = 1; n < nodes.size(); ++n) {
    const std::size_t kp = nodes[n - 1];
    const Vector s_now = node_prices(path, nodes[n]);
    v += strategy_with_coef(sol, coef, path.t[kp], path.Z[kp], s_prev).dot(s_now - s_prev);
    s_prev = s_now;
  }
  return v;
}

TruncatedOutcome truncated_strategy(const StrategySolution& sol, const SimulatedPath& path,
                                    double n, int stride) {
  if (!(n > 1.0)) throw ConfigError("truncated_strategy: n must exceed 1");
  TruncatedOutcome out;
  out.stop_time = sol.horizon;
  const auto nodes = stride_nodes(path, stride);
  double v = sol.capital;
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const std::size_t k = nodes[j];
    const double lz = sol.lambda * path.Z[k];
    if (lz >= n || lz <= 1.0 / n) {
      out.stopped_before_T = true;
      out.stop_time = path.t[k];
      break;
    }
    const Vector s_now = node_prices(path, k);
    const Vector s_next = node_prices(path, nodes[j + 1]);
    v += strategy_at(sol, path.t[k], path.Z[k], s_now).dot(s_next - s_now);
  }
  out.terminal_wealth = v;
  return out;
}

}  // namespace levyopt
