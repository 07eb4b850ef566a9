#include "core/tabulated.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace levyopt {

TabulatedJumps::TabulatedJumps(const JumpMeasure& nu, int cells_per_piece) {
  if (nu.kind() != JumpMeasure::Kind::Density) {
    throw Error("TabulatedJumps needs a density-type measure");
  }
  if (nu.log_map()) throw Error("TabulatedJumps does not support log-mapped measures");
  const auto& shape = nu.density_shape();
  const auto& tilt = nu.tilt();
  TailGrowth growth;
  if (tilt) growth = tilt->growth();

  auto weight = [&](double y) {
    const double lv = shape.log_value(y);
    if (lv == -std::numeric_limits<double>::infinity()) return 0.0;
    double v = std::exp(lv);
    if (tilt) v *= tilt->value(y);
    return v;
  };

  const double inner = std::max(nu.inner_cutoff(), 1e-10);
  struct Cell {
    double a, b, m;
  };
  std::vector<Cell> cells;
  for (Side side : {Side::Lower, Side::Upper}) {
    const double sign = side == Side::Lower ? -1.0 : 1.0;
    const double reach = side == Side::Lower ? -shape.lower() : shape.upper();
    if (!(reach > inner)) continue;
    const double far = std::min(reach, shape.tail_cutoff(side, growth.at(side)));
    std::vector<double> edges;
    const double mid = std::min(1.0, far);
    const double ratio = std::pow(mid / inner, 1.0 / cells_per_piece);
    double e = inner;
    for (int k = 0; k < cells_per_piece; ++k, e *= ratio) edges.push_back(e);
    edges.push_back(mid);
    if (far > mid) {
      for (int k = 1; k <= cells_per_piece; ++k) {
        edges.push_back(mid + (far - mid) * k / cells_per_piece);
      }
    }
    std::vector<Cell> side_cells;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double a = sign * edges[k];
      const double b = sign * edges[k + 1];
      const double w = std::abs(b - a);
      const double m = w / 6.0 * (weight(a) + 4.0 * weight(0.5 * (a + b)) + weight(b));
      side_cells.push_back({std::min(a, b), std::max(a, b), m});
    }
    if (side == Side::Lower) std::reverse(side_cells.begin(), side_cells.end());
    cells.insert(cells.end(), side_cells.begin(), side_cells.end());
  }
  double acc = 0.0;
  for (const auto& c : cells) {
    if (!std::isfinite(c.m)) throw DivergentIntegralError("tabulated jump mass is not finite");
    acc += c.m;
    lo_.push_back(c.a);
    hi_.push_back(c.b);
    cdf_.push_back(acc);
  }
  if (!(acc > 0.0)) throw Error("TabulatedJumps: measure has no mass");
}

double TabulatedJumps::quantile(double u) const {
  const double target = std::clamp(u, 0.0, 1.0) * mass();
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.end()) return hi_.back();
  const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
  const double before = k == 0 ? 0.0 : cdf_[k - 1];
  const double m = cdf_[k] - before;
  const double frac = m > 0.0 ? (target - before) / m : 0.5;
  return lo_[k] + frac * (hi_[k] - lo_[k]);
}

}  // namespace levyopt
