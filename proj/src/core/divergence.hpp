#pragma once

#include <limits>
#include <optional>
#include <string>

namespace levyopt {

enum class DivergencePreset { Log, Power, Exponential, Custom };

/// Convex f with f''(x) = a x^gamma together with its concave conjugate
/// utility u(x) = inf_y { f(y) + x y }.
///
/// f is pinned by the two constants f'(1) and f(1). The presets carry the
/// classical pairs:
///   log          u = ln x         f = -ln x - 1
///   power(p)     u = x^p / p      f = -((p-1)/p) x^{p/(p-1)}
///   exponential  u = 1 - e^{-x}   f = 1 - x + x ln x
class DivergenceSpec {
 public:
  static DivergenceSpec log();
  static DivergenceSpec power(double p);
  static DivergenceSpec exponential();
  static DivergenceSpec custom(double a, double gamma, double fprime_at_1,
                               double f_at_1);

  /// "log", "exponential", "power:<p>" or "custom:<a>,<gamma>,<f'(1)>,<f(1)>".
  static DivergenceSpec parse(const std::string& text);

  double a() const noexcept { return a_; }
  double gamma() const noexcept { return gamma_; }
  double fprime_at_1() const noexcept { return fprime1_; }
  double f_at_1() const noexcept { return f1_; }
  DivergencePreset preset() const noexcept { return preset_; }
  std::optional<double> power_p() const noexcept { return p_; }
  std::string name() const;

  /// gamma == -1: f' is logarithmic and several closed forms switch branch.
  bool log_branch() const noexcept { return gamma_ == -1.0; }

  double f(double x) const;
  double fprime(double x) const;
  double fsecond(double x) const;

  /// Open range (lo, hi) of f' on (0, inf).
  double fprime_range_lo() const noexcept;
  double fprime_range_hi() const noexcept;
  bool in_fprime_range(double w) const noexcept;
  /// (f')^{-1}(w); DomainError outside the range.
  double fprime_inverse(double w) const;

  /// Wealth domain of u is (wealth_floor, wealth_ceiling); the floor is the
  /// usual underline-x (0 for log and power, -inf for exponential).
  double wealth_floor() const noexcept { return -fprime_range_hi(); }
  double wealth_ceiling() const noexcept { return -fprime_range_lo(); }

  double utility(double x) const;
  double utility_prime(double x) const;
  /// I(y) = (u')^{-1}(y) = -f'(y).
  double inverse_marginal(double y) const;

  /// ((gamma+1)/a)(x + f'(1)) - 1.
  double alpha(double x_capital) const;

 private:
  DivergenceSpec(double a, double gamma, double fprime1, double f1,
                 DivergencePreset preset, std::optional<double> p);

  double a_;
  double gamma_;
  double fprime1_;
  double f1_;
  DivergencePreset preset_;
  std::optional<double> p_;
};

}  // namespace levyopt
