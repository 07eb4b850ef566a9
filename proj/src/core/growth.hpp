#pragma once

#include <algorithm>
#include <limits>

namespace levyopt {

/// Asymptotic size of an integrand on one tail of the jump measure:
/// log|g(y)| <= double_exp * e^{|y|} + rate * |y| + O(1)  as |y| -> inf.
///
/// Products add, sums take the lexicographic maximum. A negative double_exp
/// means super-exponential decay and dominates any rate.
struct Growth {
  double double_exp = 0.0;
  double rate = 0.0;

  static Growth bounded() { return {}; }
  static Growth exponential(double r) { return {0.0, r}; }

  friend Growth operator+(const Growth& a, const Growth& b) {
    return {a.double_exp + b.double_exp, a.rate + b.rate};
  }
  friend Growth operator*(double k, const Growth& g) {
    return {k * g.double_exp, k * g.rate};
  }
  friend bool operator<(const Growth& a, const Growth& b) {
    if (a.double_exp != b.double_exp) return a.double_exp < b.double_exp;
    return a.rate < b.rate;
  }
  friend bool operator==(const Growth&, const Growth&) = default;
};

inline Growth max(const Growth& a, const Growth& b) { return a < b ? b : a; }

enum class Side { Lower, Upper };

/// Growth of an integrand on both tails, in terms of |y|.
struct TailGrowth {
  Growth lower;
  Growth upper;

  static TailGrowth bounded() { return {}; }
  /// e^{w y}: grows like e^{w|y|} above and e^{-w|y|} below.
  static TailGrowth exp_linear(double w) {
    return {Growth::exponential(-w), Growth::exponential(w)};
  }
  const Growth& at(Side s) const { return s == Side::Lower ? lower : upper; }

  friend TailGrowth operator+(const TailGrowth& a, const TailGrowth& b) {
    return {a.lower + b.lower, a.upper + b.upper};
  }
  friend TailGrowth operator*(double k, const TailGrowth& g) {
    return {k * g.lower, k * g.upper};
  }
};

inline TailGrowth max(const TailGrowth& a, const TailGrowth& b) {
  return {max(a.lower, b.lower), max(a.upper, b.upper)};
}

}  // namespace levyopt
