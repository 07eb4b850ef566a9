#include "core/jump_density.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"

namespace levyopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tail pieces are integrated out to where the integrand has decayed by e^{-40}
// relative to its scale.
constexpr double kTailDecades = 40.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check(bool ok, const char* msg) {
  if (!ok) throw ConfigError(msg);
}

bool exponential_tail_integrable(double eta, const Growth& g) {
  if (g.double_exp < 0.0) return true;
  if (g.double_exp > 0.0) return false;
  return g.rate < eta;
}

double exponential_tail_cutoff(double eta, const Growth& g) {
  const double r = g.double_exp < 0.0 ? 0.0 : g.rate;
  return 1.0 + kTailDecades / (eta - r);
}

}  // namespace

JumpDensity::JumpDensity(Shape shape) : shape_(shape) {
  std::visit(
      Overloaded{
          [](const GaussianJumps& s) {
            check(s.intensity > 0.0 && std::isfinite(s.intensity),
                  "gaussian jumps: intensity must be positive");
            check(s.stddev > 0.0 && std::isfinite(s.stddev),
                  "gaussian jumps: stddev must be positive");
            check(std::isfinite(s.mean), "gaussian jumps: mean must be finite");
          },
          [](const DoubleExponentialJumps& s) {
            check(s.intensity > 0.0 && std::isfinite(s.intensity),
                  "double_exponential jumps: intensity must be positive");
            check(s.p_up >= 0.0 && s.p_up <= 1.0,
                  "double_exponential jumps: p_up must lie in [0, 1]");
            check(s.eta_up > 0.0 && s.eta_down > 0.0,
                  "double_exponential jumps: eta_up and eta_down must be positive");
          },
          [](const TemperedStableJumps& s) {
            check(s.c > 0.0 && s.g > 0.0 && s.m > 0.0,
                  "tempered_stable jumps: c, g, m must be positive");
            check(s.index < 2.0, "tempered_stable jumps: index must be < 2");
          },
          [](const PowerLawJumps& s) {
            check(s.scale > 0.0 && s.bound > 0.0 && std::isfinite(s.bound),
                  "power_law jumps: scale and bound must be positive");
            check(std::isfinite(s.exponent), "power_law jumps: exponent must be finite");
          },
      },
      shape_);
}

std::string JumpDensity::name() const {
  return std::visit(Overloaded{
                        [](const GaussianJumps&) { return std::string("gaussian"); },
                        [](const DoubleExponentialJumps&) {
                          return std::string("double_exponential");
                        },
                        [](const TemperedStableJumps&) {
                          return std::string("tempered_stable");
                        },
                        [](const PowerLawJumps&) { return std::string("power_law"); },
                    },
                    shape_);
}

double JumpDensity::log_value(double y) const {
  if (y == 0.0) return -kInf;
  return std::visit(
      Overloaded{
          [y](const GaussianJumps& s) {
            const double z = (y - s.mean) / s.stddev;
            return std::log(s.intensity) - std::log(s.stddev) -
                   0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
          },
          [y](const DoubleExponentialJumps& s) {
            if (y > 0.0) {
              return s.p_up > 0.0
                         ? std::log(s.intensity * s.p_up * s.eta_up) - s.eta_up * y
                         : -kInf;
            }
            return s.p_up < 1.0 ? std::log(s.intensity * (1.0 - s.p_up) * s.eta_down) +
                                      s.eta_down * y
                                : -kInf;
          },
          [y](const TemperedStableJumps& s) {
            const double ay = std::abs(y);
            const double decay = y > 0.0 ? s.m : s.g;
            return std::log(s.c) - decay * ay - (1.0 + s.index) * std::log(ay);
          },
          [y](const PowerLawJumps& s) {
            const double ay = std::abs(y);
            if (ay > s.bound) return -kInf;
            return std::log(s.scale) - s.exponent * std::log(ay);
          },
      },
      shape_);
}

double JumpDensity::value(double y) const {
  const double lv = log_value(y);
  return lv == -kInf ? 0.0 : std::exp(lv);
}

double JumpDensity::lower() const {
  if (const auto* p = std::get_if<PowerLawJumps>(&shape_)) return -p->bound;
  if (const auto* k = std::get_if<DoubleExponentialJumps>(&shape_)) {
    if (k->p_up == 1.0) return 0.0;
  }
  return -kInf;
}

double JumpDensity::upper() const {
  if (const auto* p = std::get_if<PowerLawJumps>(&shape_)) return p->bound;
  if (const auto* k = std::get_if<DoubleExponentialJumps>(&shape_)) {
    if (k->p_up == 0.0) return 0.0;
  }
  return kInf;
}

std::optional<double> JumpDensity::singularity_index() const {
  if (const auto* t = std::get_if<TemperedStableJumps>(&shape_)) {
    if (t->index > -1.0) return t->index;
  }
  if (const auto* p = std::get_if<PowerLawJumps>(&shape_)) {
    if (p->exponent > 0.0) return p->exponent - 1.0;
  }
  return std::nullopt;
}

bool JumpDensity::infinite_activity() const {
  const auto idx = singularity_index();
  return idx && *idx >= 0.0;
}

bool JumpDensity::levy_integrable() const {
  const auto idx = singularity_index();
  return !idx || *idx < 2.0;
}

bool JumpDensity::tail_integrable(Side side, const Growth& g) const {
  return std::visit(
      Overloaded{
          [&](const GaussianJumps&) { return !(g.double_exp > 0.0); },
          [&](const DoubleExponentialJumps& s) {
            if (side == Side::Upper ? s.p_up == 0.0 : s.p_up == 1.0) return true;
            return exponential_tail_integrable(side == Side::Upper ? s.eta_up : s.eta_down, g);
          },
          [&](const TemperedStableJumps& s) {
            return exponential_tail_integrable(side == Side::Upper ? s.m : s.g, g);
          },
          [&](const PowerLawJumps&) { return true; },
      },
      shape_);
}

double JumpDensity::tail_cutoff(Side side, const Growth& g) const {
  return std::visit(
      Overloaded{
          [&](const GaussianJumps& s) {
            const double r = g.double_exp < 0.0 ? 0.0 : std::max(g.rate, 0.0);
            const double centre = side == Side::Upper ? s.mean : -s.mean;
            return std::max(1.0, centre + r * s.stddev * s.stddev + kTailDecades * s.stddev);
          },
          [&](const DoubleExponentialJumps& s) {
            return exponential_tail_cutoff(side == Side::Upper ? s.eta_up : s.eta_down, g);
          },
          [&](const TemperedStableJumps& s) {
            return exponential_tail_cutoff(side == Side::Upper ? s.m : s.g, g);
          },
          [&](const PowerLawJumps& s) { return s.bound; },
      },
      shape_);
}

}  // namespace levyopt
