#pragma once

#include <Eigen/Dense>
#include <span>

#include "core/divergence.hpp"
#include "core/growth.hpp"

namespace levyopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Second Girsanov parameter of a Levy-preserving f-minimal measure:
///   Y(y) = (f')^{-1}( f'(1) + sum_i beta_i (e^{y_i} - 1) ).
///
/// All evaluations route through log Y so that Y - 1 and log Y stay accurate
/// for tiny jumps.
class JumpRatio {
 public:
  JumpRatio(DivergenceSpec spec, Vector beta);

  const DivergenceSpec& spec() const noexcept { return spec_; }
  const Vector& beta() const noexcept { return beta_; }
  int dim() const noexcept { return static_cast<int>(beta_.size()); }

  /// sum_i beta_i (e^{y_i} - 1).
  double shift(std::span<const double> y) const;
  bool defined(std::span<const double> y) const;

  /// Throw YUndefinedError when the argument leaves the range of f'.
  double log_value(std::span<const double> y) const;
  double value(std::span<const double> y) const;
  double minus_one(std::span<const double> y) const;
  /// dY/dy_i = beta_i e^{y_i} / f''(Y(y)).
  double derivative(std::span<const double> y, int i) const;

  double log_value(double y) const { return log_value(std::span<const double>(&y, 1)); }
  double value(double y) const { return value(std::span<const double>(&y, 1)); }
  double minus_one(double y) const { return minus_one(std::span<const double>(&y, 1)); }
  bool defined(double y) const { return defined(std::span<const double>(&y, 1)); }

  /// d = 1 only: is Y defined on every point of [lo, hi] (limits included
  /// for infinite endpoints)? The argument of (f')^{-1} is monotone in y, so
  /// the endpoints decide.
  bool defined_on(double lo, double hi) const;

  /// d = 1 only: asymptotics of log Y on each tail. Meaningful only where
  /// defined_on() holds.
  TailGrowth growth() const;

  /// d = 1 only: log Y(y) ~ slope * y (or ~ double_coef * e^y) as y -> +inf.
  /// Used to carry integrand growth through the map y -> log Y(y).
  TailGrowth compose(const TailGrowth& g_in_log_space) const;

 private:
  double log_from_shift(double s, double y_for_error) const;

  DivergenceSpec spec_;
  Vector beta_;
};

}  // namespace levyopt
