#pragma once

#include <doctest.h>

#include "verify/verification.hpp"

namespace levyopt::testing {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline LevyTriplet black_scholes(double b = 0.05, double c = 0.04) {
  return {1, vec({b}), Matrix::Constant(1, 1, c), JumpMeasure::none(1)};
}

inline LevyTriplet merton(double b = 0.01, double c = 0.04) {
  return {1, vec({b}), Matrix::Constant(1, 1, c),
          JumpMeasure::density(JumpDensity(GaussianJumps{1.0, -0.05, 0.1}))};
}

inline LevyTriplet kou(double b = 0.01, double c = 0.04) {
  return {1, vec({b}), Matrix::Constant(1, 1, c),
          JumpMeasure::density(JumpDensity(DoubleExponentialJumps{1.0, 0.4, 10.0, 8.0}))};
}

inline LevyTriplet single_atom(double y = -0.2, double w = 1.0, double b = 0.05) {
  return {1, vec({b}), Matrix::Zero(1, 1), JumpMeasure::atoms({{vec({y}), w}})};
}

inline std::vector<DivergenceSpec> presets() {
  return {DivergenceSpec::log(), DivergenceSpec::exponential(), DivergenceSpec::power(0.5),
          DivergenceSpec::power(-1.0)};
}

inline Vector ones(int d = 1) { return Vector::Ones(d); }

}  // namespace levyopt::testing
