#pragma once

#include <complex>
#include <string>
#include <vector>

#include "core/jump_measure.hpp"

namespace levyopt {

using ComplexVector = Eigen::VectorXcd;

/// Characteristic triplet (b, c, nu) for the truncation h(y) = y 1{|y| <= 1}.
struct LevyTriplet {
  int dim = 1;
  Vector drift;
  Matrix gauss;
  JumpMeasure jumps = JumpMeasure::none(1);
};

struct SimulationSettings {
  /// Jumps smaller than this are dropped from infinite-activity densities.
  double epsilon = 1e-3;
  /// Replace dropped small jumps by a Brownian part with the same variance.
  bool gaussian_correction = true;
};

struct MarketModel {
  std::string name;
  LevyTriplet triplet;
  Vector spot;
  double rate = 0.0;
  double horizon = 1.0;
  SimulationSettings sim;
};

/// Euclidean truncation h(y) = y 1{|y| <= 1}, returned as the scale 0 or 1.
inline double truncation_weight(std::span<const double> y) {
  double n2 = 0.0;
  for (double v : y) n2 += v * v;
  return n2 <= 1.0 ? 1.0 : 0.0;
}

/// psi(u) with E[e^{i<u, X_t>}] = e^{t psi(u)}.
std::complex<double> levy_exponent(const LevyTriplet& triplet, const ComplexVector& u,
                                   const QuadratureOptions& opts = {});

/// psi(-i w) = log E[e^{<w, X_1>}]. Throws DivergentIntegralError when the
/// exponential moment is infinite.
double laplace_exponent(const LevyTriplet& triplet, const Vector& w,
                        const QuadratureOptions& opts = {});

/// Violated invariants, one line each; empty iff the model is well formed.
std::vector<std::string> validate_model(const MarketModel& model);

/// Triplet of the discounted log-price X_t - r t.
LevyTriplet discounted_triplet(const MarketModel& model);

/// int_{0 < |y| <= eps} |y|^2 nu(dy) for a one-dimensional density.
double small_jump_variance(const JumpMeasure& nu, double eps);

/// Drop jumps with |y| <= eps. The compensated small jumps have mean zero, so
/// the drift is unchanged; with `gaussian_correction` their variance moves
/// into c. Finite-activity triplets are returned unchanged.
LevyTriplet truncate_small_jumps(const LevyTriplet& triplet, double eps,
                                 bool gaussian_correction);

}  // namespace levyopt
