#include "measure/measure_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/numerics.hpp"
#include "core/tabulated.hpp"
#include "measure/moments.hpp"

namespace levyopt {

namespace {

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Growth of (e^y - 1) Y + h and of (e^{y_i} - 1)(e^{y_j} - 1) / f''(Y).
TailGrowth residual_growth(const JumpRatio& ratio) {
  return TailGrowth{Growth::bounded(), Growth::exponential(1.0)} + ratio.growth();
}

TailGrowth jacobian_growth(const JumpRatio& ratio) {
  const double g = ratio.spec().gamma();
  return max(TailGrowth{Growth::bounded(), Growth::exponential(2.0)} + (-g) * ratio.growth(),
             TailGrowth::bounded());
}

// (e^{y_i} - 1) Y(y) - h_i(y), split to keep O(y^2) accuracy near 0.
double residual_integrand(const JumpRatio& ratio, std::span<const double> y, int i) {
  const double ym1 = ratio.minus_one(y);
  const double e = std::expm1(y[i]);
  const double hw = truncation_weight(y);
  return e * ym1 + (hw > 0.0 ? exp_remainder(y[i]) : e);
}

double jacobian_integrand(const JumpRatio& ratio, std::span<const double> y, int i, int j) {
  const auto& spec = ratio.spec();
  const double L = ratio.log_value(y);
  return std::expm1(y[i]) * std::expm1(y[j]) * std::exp(-spec.gamma() * L) / spec.a();
}

enum class TrialFailure { None, Positivity, Integrability, Quadrature };

struct Trial {
  TrialFailure failure = TrialFailure::None;
  std::string message;
  MartingaleResidual residual;
};

Trial try_residual(const LevyTriplet& tr, const DivergenceSpec& spec, const Vector& beta,
                   const QuadratureOptions& q) {
  Trial t;
  try {
    t.residual = martingale_residual(tr, spec, beta, q);
    if (!t.residual.value.allFinite() || !t.residual.jacobian.allFinite()) {
      t.failure = TrialFailure::Integrability;
      t.message = "martingale residual is not finite";
    }
  } catch (const YUndefinedError& e) {
    t.failure = TrialFailure::Positivity;
    t.message = e.what();
  } catch (const DivergentIntegralError& e) {
    t.failure = TrialFailure::Integrability;
    t.message = e.what();
  } catch (const QuadratureError& e) {
    t.failure = TrialFailure::Quadrature;
    t.message = e.what();
  }
  return t;
}

Vector newton_direction(const Matrix& J, const Vector& G) {
  Eigen::LDLT<Matrix> ldlt(J);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const double dmin = ldlt.vectorD().minCoeff();
    const double dmax = ldlt.vectorD().maxCoeff();
    if (dmin > 1e-14 * std::max(1.0, dmax)) return ldlt.solve(-G);
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(J);
  return cod.solve(-G);
}

// Iterates that push Y to 0 or infinity on the support signal that the root
// would require Y <= 0 somewhere.
bool ratio_degenerate(const LevyTriplet& tr, const JumpRatio& ratio) {
  std::vector<Vector> probes;
  if (tr.jumps.kind() == JumpMeasure::Kind::Atoms) {
    for (const auto& atom : tr.jumps.atom_list()) probes.push_back(atom.location);
  } else if (tr.jumps.kind() == JumpMeasure::Kind::Density) {
    const auto& shape = tr.jumps.density_shape();
    for (double y : {-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0}) {
      if (y > shape.lower() && y < shape.upper()) probes.push_back(Vector::Constant(1, y));
    }
  }
  for (const auto& y : probes) {
    try {
      if (std::abs(ratio.log_value(as_span(y))) > 20.0) return true;
    } catch (const YUndefinedError&) {
      return true;
    }
  }
  return false;
}

std::string vec_str(const Vector& v) {
  std::ostringstream os;
  os.precision(12);
  os << "(";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

double candidate_Y(const DivergenceSpec& spec, const Vector& beta, const Vector& y) {
  return JumpRatio(spec, beta).value(as_span(y));
}

MartingaleResidual martingale_residual(const LevyTriplet& tr, const DivergenceSpec& spec,
                                       const Vector& beta, const QuadratureOptions& opts) {
  const int d = tr.dim;
  if (beta.size() != d) throw ConfigError("martingale_residual: beta has wrong length");
  MartingaleResidual r;
  r.value = tr.drift + 0.5 * tr.gauss.diagonal() + tr.gauss * beta;
  r.jacobian = tr.gauss;
  const auto& nu = tr.jumps;
  if (nu.empty()) return r;
  const JumpRatio ratio(spec, beta);
  if (nu.kind() == JumpMeasure::Kind::Density) {
    const auto& shape = nu.density_shape();
    if (!ratio.defined_on(shape.lower(), shape.upper())) {
      const double y_bad = ratio.defined(shape.upper()) ? shape.lower() : shape.upper();
      throw YUndefinedError("Y undefined at y = " + std::to_string(y_bad) +
                                ": f'(1) + beta (e^y - 1) leaves the range of f'",
                            y_bad);
    }
  }
  const TailGrowth gv = residual_growth(ratio);
  const TailGrowth gj = jacobian_growth(ratio);
  for (int i = 0; i < d; ++i) {
    r.value[i] += integrate_jumps(
        nu, [&](std::span<const double> y) { return residual_integrand(ratio, y, i); }, gv,
        opts);
    for (int j = 0; j <= i; ++j) {
      const double v = integrate_jumps(
          nu, [&](std::span<const double> y) { return jacobian_integrand(ratio, y, i, j); },
          gj, opts);
      r.jacobian(i, j) += v;
      if (j != i) r.jacobian(j, i) += v;
    }
  }
  return r;
}

GirsanovPair solve_beta(const LevyTriplet& tr, const DivergenceSpec& spec,
                        const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw ConfigError("solve_beta: tol must be positive");
  const int d = tr.dim;
  const auto& q = opts.quadrature;

  Vector beta;
  if (opts.init) {
    beta = *opts.init;
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(tr.gauss);
    beta = -cod.pseudoInverse() * (tr.drift + 0.5 * tr.gauss.diagonal());
  }
  Trial cur = try_residual(tr, spec, beta, q);
  if (cur.failure != TrialFailure::None) {
    beta = Vector::Zero(d);
    cur = try_residual(tr, spec, beta, q);
    if (cur.failure != TrialFailure::None) {
      throw SolverError(cur.failure == TrialFailure::Positivity ? SolverFailure::Positivity
                                                                : SolverFailure::Integrability,
                        "martingale residual cannot be evaluated at beta = 0: " + cur.message);
    }
  }

  TrialFailure last_cut = TrialFailure::None;
  std::string last_message;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const double gnorm = cur.residual.value.norm();
    if (gnorm <= opts.tol) {
      GirsanovPair pair{beta, JumpRatio(spec, beta), gnorm, iter, {}};
      pair.conditions = validate_conditions(tr, spec, beta, std::max(opts.tol * 10.0, 1e-8));
      return pair;
    }
    if (iter == opts.max_iter) break;
    if (beta.norm() > 1e6) {
      throw SolverError(SolverFailure::Positivity,
                        "beta diverges (|beta| > 1e6) without solving the martingale "
                        "condition: the root would need Y <= 0 on part of supp(nu)");
    }
    const Vector dir = newton_direction(cur.residual.jacobian, cur.residual.value);
    const double merit = 0.5 * gnorm * gnorm;
    double step = 1.0;
    bool accepted = false;
    TrialFailure cut = TrialFailure::None;
    for (int halving = 0; halving <= 60; ++halving, step *= 0.5) {
      const Vector trial_beta = beta + step * dir;
      Trial t = try_residual(tr, spec, trial_beta, q);
      if (t.failure != TrialFailure::None) {
        cut = t.failure;
        last_message = t.message;
        continue;
      }
      const double tn = t.residual.value.norm();
      if (0.5 * tn * tn <= (1.0 - 1e-4 * step) * merit || tn <= opts.tol) {
        beta = trial_beta;
        cur = std::move(t);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (cut == TrialFailure::Integrability) {
        throw SolverError(SolverFailure::Integrability,
                          "integrability (cdsec2) fails for every trial step from beta = " +
                              vec_str(beta) + ": " + last_message);
      }
      if (cut == TrialFailure::Positivity) {
        throw SolverError(SolverFailure::Positivity,
                          "Y-positivity (cdsec1) fails for every trial step from beta = " +
                              vec_str(beta) + ": " + last_message);
      }
      if (ratio_degenerate(tr, JumpRatio(spec, beta))) {
        throw SolverError(SolverFailure::Positivity,
                          "Y degenerates (-> 0 or inf) on supp(nu) at beta = " + vec_str(beta) +
                              ": the martingale condition would need Y <= 0 (cdsec1)");
      }
      if (gnorm <= 1e3 * opts.tol) {
        // Stalled at quadrature noise just above tol.
        GirsanovPair pair{beta, JumpRatio(spec, beta), gnorm, iter, {}};
        pair.conditions = validate_conditions(tr, spec, beta, std::max(opts.tol * 1e3, 1e-8));
        pair.conditions.notes.push_back("solver stalled at residual " + std::to_string(gnorm));
        return pair;
      }
      throw SolverError(SolverFailure::NoSolution,
                        "line search failed at beta = " + vec_str(beta) +
                            (last_message.empty() ? "" : ": " + last_message));
    }
    if (cut != TrialFailure::None) last_cut = cut;
  }
  if (last_cut == TrialFailure::Positivity || ratio_degenerate(tr, JumpRatio(spec, beta))) {
    throw SolverError(SolverFailure::Positivity,
                      "no solution found: iterates approach the boundary of Y > 0 (cdsec1) "
                      "at beta = " + vec_str(beta) + ": " + last_message);
  }
  throw SolverError(SolverFailure::NoSolution,
                    "no solution found after " + std::to_string(opts.max_iter) +
                        " iterations (beta = " + vec_str(beta) + ", |G| = " +
                        std::to_string(cur.residual.value.norm()) + ")");
}

ConditionReport validate_conditions(const LevyTriplet& tr, const DivergenceSpec& spec,
                                    const Vector& beta, double residual_tol) {
  ConditionReport rep;
  const JumpRatio ratio(spec, beta);
  const auto& nu = tr.jumps;

  // cdsec1
  rep.cdsec1 = true;
  if (nu.kind() == JumpMeasure::Kind::Atoms) {
    for (const auto& atom : nu.atom_list()) {
      if (!ratio.defined(as_span(atom.location))) {
        rep.cdsec1 = false;
        rep.cdsec1_detail = "Y undefined (not positive) at atom y = " + vec_str(atom.location);
        break;
      }
    }
  } else if (nu.kind() == JumpMeasure::Kind::Density) {
    const auto& shape = nu.density_shape();
    if (!ratio.defined_on(shape.lower(), shape.upper())) {
      rep.cdsec1 = false;
      rep.cdsec1_detail = "Y leaves (0, inf) at an end of the support [" +
                          std::to_string(shape.lower()) + ", " +
                          std::to_string(shape.upper()) + "]";
    } else {
      try {
        const TabulatedJumps table(nu.truncated(std::max(nu.inner_cutoff(), 1e-6)), 1000);
        for (int k = 0; k < 1000; ++k) {
          const double y = table.quantile((k + 0.5) / 1000.0);
          if (!ratio.defined(y) || !(ratio.value(y) > 0.0)) {
            rep.cdsec1 = false;
            rep.cdsec1_detail = "Y not positive at quantile point y = " + std::to_string(y);
            break;
          }
        }
      } catch (const Error& e) {
        rep.notes.push_back(std::string("cdsec1 quantile grid skipped: ") + e.what());
      }
    }
  }
  if (rep.cdsec1 && rep.cdsec1_detail.empty()) rep.cdsec1_detail = "Y > 0 on supp(nu)";

  // cdsec2
  rep.cdsec2 = true;
  if (nu.kind() == JumpMeasure::Kind::Density && rep.cdsec1) {
    const auto& shape = nu.density_shape();
    const bool upper_ok = shape.upper() <= 1.0 ||
                          shape.tail_integrable(Side::Upper, residual_growth(ratio).upper);
    const bool lower_ok = shape.lower() >= -1.0 ||
                          shape.tail_integrable(Side::Lower, residual_growth(ratio).lower);
    rep.cdsec2 = upper_ok && lower_ok;
    rep.cdsec2_detail = rep.cdsec2 ? "tail integral of (e^y - 1) Y nu is finite"
                                   : std::string("tail integral of (e^y - 1) Y nu diverges on the ") +
                                         (upper_ok ? "lower" : "upper") + " tail";
  } else if (nu.kind() == JumpMeasure::Kind::Density) {
    rep.cdsec2 = false;
    rep.cdsec2_detail = "not checked: Y undefined";
  } else {
    rep.cdsec2_detail = nu.empty() ? "no jumps" : "finitely many atoms";
  }

  // cdsec3
  if (rep.cdsec1 && rep.cdsec2) {
    try {
      const auto r = martingale_residual(tr, spec, beta);
      rep.residual_norm = r.value.norm();
      rep.cdsec3 = rep.residual_norm <= residual_tol;
    } catch (const Error& e) {
      rep.residual_norm = std::numeric_limits<double>::infinity();
      rep.notes.push_back(std::string("martingale residual: ") + e.what());
    }
  } else {
    rep.residual_norm = std::numeric_limits<double>::infinity();
  }

  // integcd: every expectation reduces to E_P[Z^{gamma+2}]; the log-type
  // branches also need a neighbourhood of that exponent.
  if (rep.cdsec1) {
    const double t0 = spec.gamma() + 2.0;
    std::vector<double> thetas{t0};
    if (spec.gamma() == -2.0 || spec.gamma() == -1.0) {
      thetas = {t0 - 0.05, t0, t0 + 0.05};
    }
    rep.integcd = true;
    for (double th : thetas) {
      MomentCheck mc{th, false, std::numeric_limits<double>::quiet_NaN()};
      try {
        mc.kappa_p = kappa_p(tr, ratio, th);
        mc.finite = std::isfinite(mc.kappa_p);
      } catch (const Error&) {
        mc.finite = false;
      }
      rep.integcd = rep.integcd && mc.finite;
      rep.moments.push_back(mc);
    }
  }
  return rep;
}

GirsanovPair make_pair(const LevyTriplet& tr, const DivergenceSpec& spec, const Vector& beta) {
  GirsanovPair pair{beta, JumpRatio(spec, beta), 0.0, 0, {}};
  pair.conditions = validate_conditions(tr, spec, beta);
  pair.residual_norm = pair.conditions.residual_norm;
  return pair;
}

HellingerValue hellinger_half(const LevyTriplet& tr, const GirsanovPair& pair, double T) {
  HellingerValue h{0.5 * T * pair.beta.dot(tr.gauss * pair.beta), ""};
  if (tr.jumps.empty()) return h;
  const auto& ratio = pair.ratio;
  try {
    TailGrowth growth;
    if (tr.jumps.kind() == JumpMeasure::Kind::Density) {
      growth = max(ratio.growth(), TailGrowth::bounded());
    }
    const double integral = integrate_jumps(
        tr.jumps,
        [&](std::span<const double> y) {
          const double s = std::expm1(0.5 * ratio.log_value(y));
          return s * s;
        },
        growth);
    h.value += T / 8.0 * integral;
  } catch (const Error& e) {
    h.value = std::numeric_limits<double>::infinity();
    h.diagnostic = std::string("Hellinger jump integral diverges: ") + e.what();
  }
  return h;
}

LevyTriplet q_triplet(const LevyTriplet& tr, const GirsanovPair& pair) {
  LevyTriplet q = tr;
  q.drift = tr.drift + tr.gauss * pair.beta;
  if (tr.jumps.empty()) return q;
  const auto& ratio = pair.ratio;
  for (int i = 0; i < tr.dim; ++i) {
    q.drift[i] += integrate_jumps(tr.jumps, [&](std::span<const double> y) {
      return truncation_weight(y) > 0.0 ? y[i] * ratio.minus_one(y) : 0.0;
    });
  }
  q.jumps = tr.jumps.tilted(ratio);
  return q;
}

}  // namespace levyopt
