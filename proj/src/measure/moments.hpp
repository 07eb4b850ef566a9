#pragma once

#include "core/levy_core.hpp"

namespace levyopt {

/// Moment rates of the density Z = E(N) of a Levy-preserving change of
/// measure with parameters (beta, Y):  E_P[Z_t^theta] = e^{t kappa_P(theta)}
/// and E_Q[Z_t^theta] = E_P[Z_t^{theta+1}] = e^{t kappa_Q(theta)}.
///
///   kappa_P(theta) = theta (theta - 1) v / 2
///                    + int (Y^theta - 1 - theta (Y - 1)) nu(dy),  v = beta' c beta.

double gaussian_variance_rate(const LevyTriplet& triplet, const JumpRatio& ratio);

/// Is Y^theta integrable against nu on the tails (so kappa_P(theta) < inf)?
bool kappa_p_finite(const LevyTriplet& triplet, const JumpRatio& ratio, double theta);

/// Throws DivergentIntegralError ("moment infinite") outside the domain.
double kappa_p(const LevyTriplet& triplet, const JumpRatio& ratio, double theta,
               const QuadratureOptions& opts = {});
inline double kappa_q(const LevyTriplet& triplet, const JumpRatio& ratio, double theta,
                      const QuadratureOptions& opts = {}) {
  return kappa_p(triplet, ratio, theta + 1.0, opts);
}

/// d/dtheta kappa_Q at 0, the Q-mean rate of log Z:
///   v/2 + int (Y log Y - Y + 1) nu(dy).
double q_log_mean_rate(const LevyTriplet& triplet, const JumpRatio& ratio,
                       const QuadratureOptions& opts = {});

/// Growth of Y - 1, log Y and friends need a sliver of extra rate on
/// exponential tails; this is the sliver.
inline constexpr double kLogSlack = 1e-6;

}  // namespace levyopt
