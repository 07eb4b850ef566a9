#include "core/divergence.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "core/errors.hpp"

namespace levyopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

DivergenceSpec::DivergenceSpec(double a, double gamma, double fprime1,
                               double f1, DivergencePreset preset,
                               std::optional<double> p)
    : a_(a), gamma_(gamma), fprime1_(fprime1), f1_(f1), preset_(preset), p_(p) {
  if (!(a_ > 0.0) || !std::isfinite(a_)) {
    throw DomainError("divergence: a must be a positive finite number");
  }
  if (!std::isfinite(gamma_) || !std::isfinite(fprime1_) || !std::isfinite(f1_)) {
    throw DomainError("divergence: gamma, f'(1) and f(1) must be finite");
  }
}

DivergenceSpec DivergenceSpec::log() {
  return DivergenceSpec(1.0, -2.0, -1.0, -1.0, DivergencePreset::Log, std::nullopt);
}

DivergenceSpec DivergenceSpec::exponential() {
  return DivergenceSpec(1.0, -1.0, 0.0, 0.0, DivergencePreset::Exponential,
                        std::nullopt);
}

DivergenceSpec DivergenceSpec::power(double p) {
  if (!(p < 1.0) || p == 0.0 || !std::isfinite(p)) {
    throw DomainError("divergence: power preset needs p < 1 and p != 0");
  }
  const double a = 1.0 / (1.0 - p);
  const double gamma = (2.0 - p) / (p - 1.0);
  const double f1 = (1.0 - p) / p;
  return DivergenceSpec(a, gamma, -1.0, f1, DivergencePreset::Power, p);
}

DivergenceSpec DivergenceSpec::custom(double a, double gamma, double fprime_at_1,
                                      double f_at_1) {
  return DivergenceSpec(a, gamma, fprime_at_1, f_at_1, DivergencePreset::Custom,
                        std::nullopt);
}

DivergenceSpec DivergenceSpec::parse(const std::string& text) {
  const auto colon = text.find_first_of(":=");
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "log") return log();
  if (head == "exponential" || head == "exp") return exponential();
  try {
    if (head == "power") {
      if (tail.empty()) throw ConfigError("divergence: power preset needs p, e.g. power:0.5");
      return power(std::stod(tail));
    }
    if (head == "custom") {
      std::vector<double> values;
      std::stringstream ss(tail);
      std::string item;
      while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
      if (values.size() != 4) {
        throw ConfigError("divergence: custom needs a,gamma,fprime1,f1");
      }
      return custom(values[0], values[1], values[2], values[3]);
    }
  } catch (const std::logic_error&) {
    throw ConfigError("divergence: cannot parse '" + text + "'");
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("divergence: unknown preset '" + text + "'");
}

std::string DivergenceSpec::name() const {
  switch (preset_) {
    case DivergencePreset::Log:
      return "log";
    case DivergencePreset::Exponential:
      return "exponential";
    case DivergencePreset::Power:
      return "power:" + format_number(*p_);
    case DivergencePreset::Custom:
      break;
  }
  return "custom:" + format_number(a_) + "," + format_number(gamma_) + "," +
         format_number(fprime1_) + "," + format_number(f1_);
}

double DivergenceSpec::fsecond(double x) const {
  if (!(x > 0.0)) throw DomainError("f'': argument must be positive");
  return a_ * std::pow(x, gamma_);
}

double DivergenceSpec::fprime(double x) const {
  if (!(x > 0.0)) throw DomainError("f': argument must be positive");
  if (log_branch()) return fprime1_ + a_ * std::log(x);
  const double g1 = gamma_ + 1.0;
  return fprime1_ + a_ * std::expm1(g1 * std::log(x)) / g1;
}

double DivergenceSpec::f(double x) const {
  if (!(x > 0.0)) throw DomainError("f: argument must be positive");
  const double lin = f1_ + fprime1_ * (x - 1.0);
  if (log_branch()) return lin + a_ * (x * std::log(x) - x + 1.0);
  if (gamma_ == -2.0) return lin - a_ * (std::log(x) - (x - 1.0));
  const double g1 = gamma_ + 1.0;
  const double g2 = gamma_ + 2.0;
  return lin + a_ / g1 * (std::expm1(g2 * std::log(x)) / g2 - (x - 1.0));
}

double DivergenceSpec::fprime_range_lo() const noexcept {
  if (log_branch() || gamma_ < -1.0) return -kInf;
  return fprime1_ - a_ / (gamma_ + 1.0);
}

double DivergenceSpec::fprime_range_hi() const noexcept {
  if (log_branch() || gamma_ > -1.0) return kInf;
  return fprime1_ - a_ / (gamma_ + 1.0);
}

bool DivergenceSpec::in_fprime_range(double w) const noexcept {
  return std::isfinite(w) && w > fprime_range_lo() && w < fprime_range_hi();
}

double DivergenceSpec::fprime_inverse(double w) const {
  if (!in_fprime_range(w)) {
    throw DomainError("(f')^{-1}: argument " + format_number(w) +
                      " outside the range of f'");
  }
  const double shift = (w - fprime1_) / a_;
  if (log_branch()) return std::exp(shift);
  const double g1 = gamma_ + 1.0;
  return std::exp(std::log1p(g1 * shift) / g1);
}

double DivergenceSpec::utility(double x) const {
  if (!(x > wealth_floor()) || !(x < wealth_ceiling())) {
    throw DomainError("u: wealth " + format_number(x) + " outside the utility domain");
  }
  switch (preset_) {
    case DivergencePreset::Log:
      return std::log(x);
    case DivergencePreset::Exponential:
      return -std::expm1(-x);
    case DivergencePreset::Power:
      return std::pow(x, *p_) / *p_;
    case DivergencePreset::Custom:
      break;
  }
  const double y = fprime_inverse(-x);
  return f(y) + x * y;
}

double DivergenceSpec::utility_prime(double x) const {
  if (!(x > wealth_floor()) || !(x < wealth_ceiling())) {
    throw DomainError("u': wealth outside the utility domain");
  }
  return fprime_inverse(-x);
}

double DivergenceSpec::inverse_marginal(double y) const {
  if (!(y > 0.0)) throw DomainError("I: argument must be positive");
  return -fprime(y);
}

double DivergenceSpec::alpha(double x_capital) const {
  if (!(x_capital > wealth_floor())) {
    throw DomainError("alpha: capital at or below the wealth floor");
  }
  return (gamma_ + 1.0) / a_ * (x_capital + fprime1_) - 1.0;
}

}  // namespace levyopt
