#include "core/jump_ratio.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace levyopt {

namespace {

std::string describe_y(std::span<const double> y) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
  os << ")";
  return os.str();
}

}  // namespace

JumpRatio::JumpRatio(DivergenceSpec spec, Vector beta)
    : spec_(std::move(spec)), beta_(std::move(beta)) {}

double JumpRatio::shift(std::span<const double> y) const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += beta_[i] * std::expm1(y[i]);
  return s;
}

double JumpRatio::log_from_shift(double s, double y_for_error) const {
  if (spec_.log_branch()) return s / spec_.a();
  const double g1 = spec_.gamma() + 1.0;
  const double u = g1 * s / spec_.a();
  if (!(u > -1.0)) {
    throw YUndefinedError("Y undefined at y = " + std::to_string(y_for_error) +
                              ": argument leaves the range of f'",
                          y_for_error);
  }
  return std::log1p(u) / g1;
}

bool JumpRatio::defined(std::span<const double> y) const {
  if (spec_.log_branch()) return true;
  return (spec_.gamma() + 1.0) * shift(y) / spec_.a() > -1.0;
}

double JumpRatio::log_value(std::span<const double> y) const {
  const double s = shift(y);
  if (!defined(y)) {
    throw YUndefinedError("Y undefined at y = " + describe_y(y) +
                              ": f'(1) + <beta, e^y - 1> leaves the range of f'",
                          y.empty() ? 0.0 : y[0]);
  }
  return log_from_shift(s, y.empty() ? 0.0 : y[0]);
}

double JumpRatio::value(std::span<const double> y) const {
  return std::exp(log_value(y));
}

double JumpRatio::minus_one(std::span<const double> y) const {
  return std::expm1(log_value(y));
}

double JumpRatio::derivative(std::span<const double> y, int i) const {
  return beta_[i] * std::exp(y[i]) / spec_.fsecond(value(y));
}

bool JumpRatio::defined_on(double lo, double hi) const {
  if (spec_.log_branch()) return true;
  const double k = (spec_.gamma() + 1.0) * beta_[0] / spec_.a();
  auto base_at = [&](double y) {
    if (y == std::numeric_limits<double>::infinity()) {
      return k > 0.0 ? std::numeric_limits<double>::infinity() : (k < 0.0 ? -1.0 : 1.0);
    }
    if (y == -std::numeric_limits<double>::infinity()) return 1.0 - k;
    return 1.0 + k * std::expm1(y);
  };
  return base_at(lo) > 0.0 && base_at(hi) > 0.0;
}

TailGrowth JumpRatio::growth() const {
  const double b = beta_[0];
  TailGrowth g;
  if (spec_.log_branch()) {
    g.upper = {b / spec_.a(), 0.0};
    return g;
  }
  const double g1 = spec_.gamma() + 1.0;
  const double k = g1 * b / spec_.a();
  // k < 0 leaves Y undefined on a far enough upper tail; defined_on() is the
  // check for that, here only bounded supports remain.
  if (k > 0.0) g.upper = Growth::exponential(1.0 / g1);
  return g;
}

TailGrowth JumpRatio::compose(const TailGrowth& gz) const {
  const double b = beta_[0];
  TailGrowth out;
  if (b == 0.0) return out;
  if (gz.lower.double_exp != 0.0 || gz.upper.double_exp != 0.0) {
    throw DivergentIntegralError(
        "integrand grows super-exponentially in log Y; not integrable");
  }
  if (spec_.log_branch()) {
    const double coef = std::abs(b) / spec_.a();
    const double rz = b > 0.0 ? gz.upper.rate : gz.lower.rate;
    out.upper = {rz * coef, 0.0};
    return out;
  }
  const double g1 = spec_.gamma() + 1.0;
  const double rz = g1 > 0.0 ? gz.upper.rate : gz.lower.rate;
  out.upper = Growth::exponential(rz / std::abs(g1));
  return out;
}

}  // namespace levyopt
