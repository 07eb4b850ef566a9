#include "density/density_engine.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace levyopt {

LevyTriplet log_density_triplet(const LevyTriplet& p, const GirsanovPair& pair,
                                MeasureTag under) {
  const auto& ratio = pair.ratio;
  const double v = pair.beta.dot(p.gauss * pair.beta);
  LevyTriplet z;
  z.dim = 1;
  z.gauss = Matrix::Constant(1, 1, v);
  z.drift = Vector::Constant(1, under == MeasureTag::P ? -0.5 * v : 0.5 * v);
  if (p.jumps.empty()) {
    z.jumps = JumpMeasure::none(1);
    return z;
  }
  TailGrowth growth;
  if (p.jumps.kind() == JumpMeasure::Kind::Density) {
    growth = max(ratio.growth(), TailGrowth::bounded()) +
             TailGrowth{Growth::exponential(kLogSlack), Growth::exponential(kLogSlack)};
  }
  double drift_jumps = 0.0;
  if (under == MeasureTag::P) {
    drift_jumps = -integrate_jumps(p.jumps, [&](std::span<const double> y) {
      const double L = ratio.log_value(y);
      return std::expm1(L) - (std::abs(L) <= 1.0 ? L : 0.0);
    }, growth);
    z.jumps = p.jumps.log_pushforward(ratio);
  } else {
    drift_jumps = integrate_jumps(p.jumps, [&](std::span<const double> y) {
      const double L = ratio.log_value(y);
      return -std::expm1(L) + (std::abs(L) <= 1.0 ? L * std::exp(L) : 0.0);
    }, growth);
    z.jumps = p.jumps.tilted(ratio).log_pushforward(ratio);
  }
  z.drift[0] += drift_jumps;
  return z;
}

DensityMomentCurve::DensityMomentCurve(LevyTriplet p_triplet, JumpRatio ratio, MeasureTag tag)
    : triplet_(std::move(p_triplet)), ratio_(std::move(ratio)), tag_(tag) {}

bool DensityMomentCurve::finite(double theta) const {
  return kappa_p_finite(triplet_, ratio_, p_exponent(theta));
}

double DensityMomentCurve::kappa(double theta) const {
  return kappa_p(triplet_, ratio_, p_exponent(theta));
}

double DensityMomentCurve::q_mean_rate() const { return q_log_mean_rate(triplet_, ratio_); }

std::pair<double, double> DensityMomentCurve::domain(double limit) const {
  // P-exponents in [0, 1] always have finite moments.
  const double base = tag_ == MeasureTag::P ? 0.5 : -0.5;
  auto edge = [&](double dir) {
    double inside = base;
    double outside = base + dir * limit;
    if (finite(outside)) return outside;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (inside + outside);
      (finite(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  return {edge(-1.0), edge(1.0)};
}

double xi_closed_form(const DivergenceSpec& spec, double kappa_g1, double t, double x,
                      double T) {
  if (!(x > 0.0)) throw DomainError("xi: x must be positive");
  return spec.a() * std::pow(x, spec.gamma()) * std::exp((T - t) * kappa_g1);
}

double H_closed_form(const DivergenceSpec& spec, const JumpRatio& ratio, double kappa_g1,
                     double t, double x, std::span<const double> y, double T) {
  const double L = ratio.log_value(y);
  if (spec.log_branch()) return spec.a() * L;
  if (!(x > 0.0)) throw DomainError("H: x must be positive");
  const double g1 = spec.gamma() + 1.0;
  return spec.a() * std::pow(x, g1) * std::expm1(g1 * L) * std::exp((T - t) * kappa_g1) / g1;
}

double rho_closed_form(const DivergenceSpec& spec, double lambda, double kappa_or_m, double t,
                       double x, double T) {
  if (!(x > 0.0)) throw DomainError("rho: x must be positive");
  const double lx = lambda * x;
  if (spec.log_branch()) {
    return spec.fprime_at_1() + spec.a() * (std::log(lx) + (T - t) * kappa_or_m);
  }
  const double g1 = spec.gamma() + 1.0;
  return spec.fprime_at_1() +
         spec.a() * std::expm1(g1 * std::log(lx) + (T - t) * kappa_or_m) / g1;
}

}  // namespace levyopt
