#pragma once

#include <utility>

#include "measure/measure_solver.hpp"
#include "measure/moments.hpp"

namespace levyopt {

enum class MeasureTag { P, Q };

inline const char* tag_name(MeasureTag t) { return t == MeasureTag::P ? "P" : "Q"; }

/// Triplet of log Z (one-dimensional) under P or Q:
///   c_Z = beta' c beta,  nu_Z = image of nu (or Y nu) under y -> log Y(y),
///   b_Z = -v/2 - int (Y - 1 - h(log Y)) dnu            under P,
///   b_Z =  v/2 - int (Y - 1) dnu + int h(log Y) Y dnu   under Q.
LevyTriplet log_density_triplet(const LevyTriplet& p_triplet, const GirsanovPair& pair,
                                MeasureTag under);

/// theta -> kappa(theta) with E[Z_s^theta] = e^{s kappa(theta)} under P or Q.
class DensityMomentCurve {
 public:
  DensityMomentCurve(LevyTriplet p_triplet, JumpRatio ratio, MeasureTag tag = MeasureTag::Q);

  MeasureTag tag() const noexcept { return tag_; }
  const JumpRatio& ratio() const noexcept { return ratio_; }

  bool finite(double theta) const;
  /// Throws DivergentIntegralError outside the finite-moment domain.
  double kappa(double theta) const;
  /// Q-mean rate of log Z (kappa_Q'(0)).
  double q_mean_rate() const;
  /// Closed interval of finite moments, clipped to [-limit, limit] and
  /// resolved by bisection.
  std::pair<double, double> domain(double limit = 50.0) const;

 private:
  double p_exponent(double theta) const { return tag_ == MeasureTag::P ? theta : theta + 1.0; }

  LevyTriplet triplet_;
  JumpRatio ratio_;
  MeasureTag tag_;
};

/// xi_t(x) = E_Q[f''(x Z_{T-t}) Z_{T-t}] = a x^gamma e^{(T-t) kappa_Q(gamma+1)}.
double xi_closed_form(const DivergenceSpec& spec, double kappa_g1, double t, double x,
                      double T);

/// H_t(x, y) = E_Q[f'(x Z_{T-t} Y(y)) - f'(x Z_{T-t})].
double H_closed_form(const DivergenceSpec& spec, const JumpRatio& ratio, double kappa_g1,
                     double t, double x, std::span<const double> y, double T);

/// rho(t, x) = E_Q[f'(lambda x Z_{T-t})]; kappa_or_m is kappa_Q(gamma+1)
/// (or the Q-mean rate m of log Z on the gamma = -1 branch).
double rho_closed_form(const DivergenceSpec& spec, double lambda, double kappa_or_m, double t,
                       double x, double T);

}  // namespace levyopt
