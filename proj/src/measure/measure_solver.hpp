#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/levy_core.hpp"

namespace levyopt {

/// G(beta) = b + diag(c)/2 + c beta + int ((e^y - 1) Y(y) - h(y)) nu(dy)
/// and its Jacobian c + int (e^{y_i} - 1)(e^{y_j} - 1) / f''(Y(y)) nu(dy).
struct MartingaleResidual {
  Vector value;
  Matrix jacobian;
};

struct MomentCheck {
  double theta;  // exponent of Z under P
  bool finite;
  double kappa_p;  // NaN when infinite
};

struct ConditionReport {
  bool cdsec1 = false;  // Y > 0 on supp(nu)
  std::string cdsec1_detail;
  bool cdsec2 = false;  // tail integral of (e^y - 1) Y finite
  std::string cdsec2_detail;
  bool cdsec3 = false;  // martingale residual vanishes
  double residual_norm = 0.0;
  bool integcd = false;  // E_P|f(lambda Z_T)| etc. finite
  std::vector<MomentCheck> moments;
  std::vector<std::string> notes;

  bool all_passed() const { return cdsec1 && cdsec2 && cdsec3 && integcd; }
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 100;
  std::optional<Vector> init;
  QuadratureOptions quadrature{1e-13, 1e-12, 12};
};

struct GirsanovPair {
  Vector beta;
  JumpRatio ratio;
  double residual_norm = 0.0;
  int iterations = 0;
  ConditionReport conditions;
};

/// Y(y) = (f')^{-1}(f'(1) + <beta, e^y - 1>); YUndefinedError off range.
double candidate_Y(const DivergenceSpec& spec, const Vector& beta, const Vector& y);

MartingaleResidual martingale_residual(const LevyTriplet& triplet, const DivergenceSpec& spec,
                                       const Vector& beta, const QuadratureOptions& opts = {});

/// Damped Newton on G. Throws SolverError with kind
///   Positivity     the root would need Y <= 0 somewhere on supp(nu),
///   Integrability  every trial step makes a tail integral diverge,
///   NoSolution     max_iter exhausted.
GirsanovPair solve_beta(const LevyTriplet& triplet, const DivergenceSpec& spec,
                        const SolverOptions& opts = {});

/// Report-style checks for a given beta; never throws for bad beta.
ConditionReport validate_conditions(const LevyTriplet& triplet, const DivergenceSpec& spec,
                                    const Vector& beta, double residual_tol = 1e-8);

/// Wrap a user-supplied beta as a pair (residual and conditions filled in).
GirsanovPair make_pair(const LevyTriplet& triplet, const DivergenceSpec& spec, const Vector& beta);

struct HellingerValue {
  double value;  // +inf when the jump integral diverges
  std::string diagnostic;
};

/// T beta' c beta / 2 + (T/8) int (sqrt(Y) - 1)^2 nu(dy).
HellingerValue hellinger_half(const LevyTriplet& triplet, const GirsanovPair& pair, double T);

/// Triplet of X under Q: (b + c beta + int h (Y - 1) dnu, c, Y nu).
LevyTriplet q_triplet(const LevyTriplet& triplet, const GirsanovPair& pair);

}  // namespace levyopt
