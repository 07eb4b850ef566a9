#include "measure/moments.hpp"

#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/numerics.hpp"

namespace levyopt {

namespace {

TailGrowth power_growth(const JumpRatio& ratio, double theta) {
  const TailGrowth gy = ratio.growth();
  TailGrowth slack{Growth::exponential(kLogSlack), Growth::exponential(kLogSlack)};
  return max(max(theta * gy, gy), TailGrowth::bounded()) + slack;
}

}  // namespace

double gaussian_variance_rate(const LevyTriplet& triplet, const JumpRatio& ratio) {
  return ratio.beta().dot(triplet.gauss * ratio.beta());
}

bool kappa_p_finite(const LevyTriplet& triplet, const JumpRatio& ratio, double theta) {
  if (triplet.jumps.kind() != JumpMeasure::Kind::Density) return true;
  try {
    return ratio.defined_on(triplet.jumps.density_shape().lower(),
                            triplet.jumps.density_shape().upper()) &&
           jumps_integrable(triplet.jumps, power_growth(ratio, theta));
  } catch (const YUndefinedError&) {
    return false;
  }
}

double kappa_p(const LevyTriplet& triplet, const JumpRatio& ratio, double theta,
               const QuadratureOptions& opts) {
  const double v = gaussian_variance_rate(triplet, ratio);
  double value = 0.5 * theta * (theta - 1.0) * v;
  if (triplet.jumps.empty()) return value;
  if (!kappa_p_finite(triplet, ratio, theta)) {
    std::ostringstream os;
    os << "moment infinite: E[Z^" << theta << "] diverges (tail of nu)";
    throw DivergentIntegralError(os.str());
  }
  auto g = [&](std::span<const double> y) {
    return power_remainder(theta, ratio.log_value(y));
  };
  TailGrowth growth;
  if (triplet.jumps.kind() == JumpMeasure::Kind::Density) growth = power_growth(ratio, theta);
  value += integrate_jumps(triplet.jumps, g, growth, opts);
  return value;
}

double q_log_mean_rate(const LevyTriplet& triplet, const JumpRatio& ratio,
                       const QuadratureOptions& opts) {
  const double v = gaussian_variance_rate(triplet, ratio);
  double value = 0.5 * v;
  if (triplet.jumps.empty()) return value;
  TailGrowth growth;
  if (triplet.jumps.kind() == JumpMeasure::Kind::Density) {
    growth = power_growth(ratio, 1.0);
    if (!jumps_integrable(triplet.jumps, growth)) {
      throw DivergentIntegralError("moment infinite: E_Q[log Z] diverges (tail of nu)");
    }
  }
  auto g = [&](std::span<const double> y) { return entropy_remainder(ratio.log_value(y)); };
  value += integrate_jumps(triplet.jumps, g, growth, opts);
  return value;
}

}  // namespace levyopt
