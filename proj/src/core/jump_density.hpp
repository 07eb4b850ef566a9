#pragma once

#include <optional>
#include <string>
#include <variant>

#include "core/growth.hpp"

namespace levyopt {

/// Merton jumps: intensity * N(mean, stddev^2).
struct GaussianJumps {
  double intensity;
  double mean;
  double stddev;
};

/// Kou jumps: intensity * (p eta_up e^{-eta_up y} 1{y>0}
///                         + (1-p) eta_down e^{eta_down y} 1{y<0}).
struct DoubleExponentialJumps {
  double intensity;
  double p_up;
  double eta_up;
  double eta_down;
};

/// CGMY: c e^{-g|y|}/|y|^{1+index} below zero, c e^{-m y}/y^{1+index} above.
/// Infinite activity for index >= 0.
struct TemperedStableJumps {
  double c;
  double g;
  double m;
  double index;
};

/// scale * |y|^{-exponent} on 0 < |y| <= bound. Mostly useful to exercise
/// the small-jump integrability check.
struct PowerLawJumps {
  double scale;
  double exponent;
  double bound;
};

/// One-dimensional Levy density on R \ {0}.
class JumpDensity {
 public:
  using Shape = std::variant<GaussianJumps, DoubleExponentialJumps,
                             TemperedStableJumps, PowerLawJumps>;

  explicit JumpDensity(Shape shape);

  const Shape& shape() const noexcept { return shape_; }
  std::string name() const;

  double value(double y) const;
  /// log n(y); -inf outside the support.
  double log_value(double y) const;

  double lower() const;
  double upper() const;

  /// Small-jump singularity: n(y) ~ |y|^{-1-index} near 0. Empty when n is
  /// bounded near zero.
  std::optional<double> singularity_index() const;
  bool infinite_activity() const;
  /// int min(1, y^2) n(y) dy < inf.
  bool levy_integrable() const;

  /// Is int_{|y|>1, side} e^{growth} n(y) dy finite?
  bool tail_integrable(Side side, const Growth& growth) const;
  /// |y| beyond which the remaining tail of e^{growth} n is negligible
  /// (or the support ends). Always >= 1 when the support extends past 1.
  double tail_cutoff(Side side, const Growth& growth) const;

 private:
  Shape shape_;
};

}  // namespace levyopt
