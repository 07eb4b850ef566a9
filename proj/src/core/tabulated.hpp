#pragma once

#include <random>
#include <vector>

#include "core/jump_measure.hpp"

namespace levyopt {

/// Piecewise-constant tabulation of a finite one-dimensional jump measure
/// (a density, optionally tilted by Y, with |y| > inner cutoff) for quantiles
/// and inverse-CDF sampling. Geometric cells near the origin, uniform cells
/// on the tails out to the integration cutoffs.
class TabulatedJumps {
 public:
  explicit TabulatedJumps(const JumpMeasure& nu, int cells_per_piece = 2000);

  double mass() const noexcept { return cdf_.empty() ? 0.0 : cdf_.back(); }
  /// u in [0, 1].
  double quantile(double u) const;

  template <class Rng>
  double sample(Rng& rng) const {
    return quantile(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<double> cdf_;  // cumulative mass at the right end of each cell
};

}  // namespace levyopt
