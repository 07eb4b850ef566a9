#include "core/levy_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/numerics.hpp"

namespace levyopt {

namespace {

std::complex<double> jump_term(std::complex<double> z, double hw) {
  return hw > 0.0 ? exp_remainder(z) : std::exp(z) - 1.0;
}

}  // namespace

std::complex<double> levy_exponent(const LevyTriplet& triplet, const ComplexVector& u,
                                   const QuadratureOptions& opts) {
  if (u.size() != triplet.dim) throw ConfigError("levy_exponent: dimension mismatch");
  const std::complex<double> I(0.0, 1.0);
  const ComplexVector bc = triplet.drift.cast<std::complex<double>>();
  const Eigen::MatrixXcd cc = triplet.gauss.cast<std::complex<double>>();
  std::complex<double> psi = I * (u.transpose() * bc)(0) - 0.5 * (u.transpose() * cc * u)(0);

  const auto& nu = triplet.jumps;
  if (nu.empty()) return psi;
  auto integrand = [&](std::span<const double> y) {
    std::complex<double> dot = 0.0;
    for (int i = 0; i < triplet.dim; ++i) dot += u[i] * y[i];
    return jump_term(I * dot, truncation_weight(y));
  };
  if (nu.kind() == JumpMeasure::Kind::Atoms) {
    std::complex<double> sum = 0.0;
    for (const auto& atom : nu.atom_list()) {
      sum += atom.weight * integrand(std::span<const double>(atom.location.data(),
                                                             atom.location.size()));
    }
    return psi + sum;
  }
  // |e^{i u y}| = e^{-Im(u) y}
  const TailGrowth growth = TailGrowth::exp_linear(-u[0].imag());
  const double re = integrate_jumps(
      nu, [&](std::span<const double> y) { return integrand(y).real(); }, growth, opts);
  const double im = integrate_jumps(
      nu, [&](std::span<const double> y) { return integrand(y).imag(); }, growth, opts);
  return psi + std::complex<double>(re, im);
}

double laplace_exponent(const LevyTriplet& triplet, const Vector& w,
                        const QuadratureOptions& opts) {
  if (w.size() != triplet.dim) throw ConfigError("laplace_exponent: dimension mismatch");
  double value = w.dot(triplet.drift) + 0.5 * w.dot(triplet.gauss * w);
  const auto& nu = triplet.jumps;
  if (nu.empty()) return value;
  auto integrand = [&](std::span<const double> y) {
    double dot = 0.0;
    for (int i = 0; i < triplet.dim; ++i) dot += w[i] * y[i];
    return truncation_weight(y) > 0.0 ? exp_remainder(dot) : std::expm1(dot);
  };
  TailGrowth growth;
  if (nu.kind() == JumpMeasure::Kind::Density) growth = TailGrowth::exp_linear(w[0]);
  try {
    value += integrate_jumps(nu, integrand, growth, opts);
  } catch (const DivergentIntegralError& e) {
    std::ostringstream os;
    os << "exponential moment E[exp(<w, X_1>)] is infinite: " << e.what();
    throw DivergentIntegralError(os.str());
  }
  if (!std::isfinite(value)) {
    throw DivergentIntegralError("exponential moment E[exp(<w, X_1>)] is infinite");
  }
  return value;
}

std::vector<std::string> validate_model(const MarketModel& model) {
  std::vector<std::string> issues;
  const auto& tr = model.triplet;
  const int d = tr.dim;
  if (d < 1) {
    issues.push_back("dim: must be a positive integer");
    return issues;
  }
  if (tr.drift.size() != d) issues.push_back("drift_b: length differs from dim");
  if (tr.gauss.rows() != d || tr.gauss.cols() != d) {
    issues.push_back("gauss_c: must be a dim x dim matrix");
  } else if (!tr.gauss.allFinite()) {
    issues.push_back("gauss_c: entries must be finite");
  } else {
    const double scale = std::max(1.0, tr.gauss.cwiseAbs().maxCoeff());
    if ((tr.gauss - tr.gauss.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      issues.push_back("gauss_c not symmetric");
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> es(tr.gauss, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
        std::ostringstream os;
        os << "gauss_c not PSD (smallest eigenvalue " << es.eigenvalues().minCoeff() << ")";
        issues.push_back(os.str());
      }
    }
  }
  if (tr.drift.size() == d && !tr.drift.allFinite()) {
    issues.push_back("drift_b: entries must be finite");
  }

  const auto& nu = tr.jumps;
  if (nu.dim() != d && !nu.empty()) issues.push_back("levy_measure: dimension differs from dim");
  if (nu.kind() == JumpMeasure::Kind::Atoms) {
    for (std::size_t j = 0; j < nu.atom_list().size(); ++j) {
      const auto& atom = nu.atom_list()[j];
      if (atom.location.size() != d) {
        issues.push_back("levy_measure: atom " + std::to_string(j) + " has wrong length");
        continue;
      }
      if (!atom.location.allFinite() || atom.location.isZero(0.0)) {
        issues.push_back("levy_measure: atom " + std::to_string(j) +
                         " must be a finite nonzero vector");
      }
      if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) {
        issues.push_back("levy_measure: atom " + std::to_string(j) +
                         " must have a positive weight");
      }
    }
  } else if (nu.kind() == JumpMeasure::Kind::Density) {
    if (d != 1) issues.push_back("levy_measure: densities are supported for dim = 1 only");
    const auto& shape = nu.density_shape();
    if (!shape.levy_integrable()) {
      issues.push_back(
          "levy_measure: integral of min(1,|y|^2) nu(dy) is infinite (singular at 0)");
    } else {
      try {
        const double m = integrate_jumps(nu, [](std::span<const double> y) {
          return std::min(1.0, y[0] * y[0]);
        });
        if (!std::isfinite(m)) {
          issues.push_back("levy_measure: integral of min(1,|y|^2) nu(dy) is infinite");
        }
      } catch (const Error& e) {
        issues.push_back(std::string("levy_measure: integral of min(1,|y|^2) nu(dy) "
                                     "could not be evaluated: ") + e.what());
      }
    }
  }

  if (model.spot.size() != d) {
    issues.push_back("spot: length differs from dim");
  } else if (!(model.spot.array() > 0.0).all() || !model.spot.allFinite()) {
    issues.push_back("spot: every initial price must be positive");
  }
  if (!(model.horizon > 0.0) || !std::isfinite(model.horizon)) {
    issues.push_back("horizon_T: must be positive");
  }
  if (!(model.rate >= 0.0) || !std::isfinite(model.rate)) {
    issues.push_back("rate_r: must be a finite non-negative number");
  }
  if (!(model.sim.epsilon > 0.0) || !(model.sim.epsilon < 1.0)) {
    issues.push_back("simulation epsilon: must lie in (0, 1)");
  }
  return issues;
}

LevyTriplet discounted_triplet(const MarketModel& model) {
  LevyTriplet tr = model.triplet;
  tr.drift = tr.drift - Vector::Constant(tr.dim, model.rate);
  return tr;
}

double small_jump_variance(const JumpMeasure& nu, double eps) {
  if (nu.kind() != JumpMeasure::Kind::Density) {
    double v = 0.0;
    for (const auto& atom : nu.atom_list()) {
      if (atom.location.norm() <= eps) v += atom.weight * atom.location.squaredNorm();
    }
    return v;
  }
  const auto& shape = nu.density_shape();
  const auto idx = shape.singularity_index();
  if (idx && *idx >= 2.0) throw DivergentIntegralError("small-jump variance is infinite");
  // y = eps e^{-t}: y^2 n(y) dy = exp(3 log y + log n(y)) dt
  const double rate = 2.0 - idx.value_or(-1.0);
  const double t_max = 45.0 / rate;
  double total = 0.0;
  for (double sign : {-1.0, 1.0}) {
    auto f = [&](double t) {
      const double ay = eps * std::exp(-t);
      const double lv = shape.log_value(sign * ay);
      if (lv == -std::numeric_limits<double>::infinity()) return 0.0;
      return std::exp(3.0 * std::log(ay) + lv);
    };
    const int chunks = std::max(1, static_cast<int>(std::ceil(t_max / 4.0)));
    for (int c = 0; c < chunks; ++c) {
      total += integrate_interval(f, t_max * c / chunks, t_max * (c + 1) / chunks);
    }
  }
  return total;
}

LevyTriplet truncate_small_jumps(const LevyTriplet& triplet, double eps,
                                 bool gaussian_correction) {
  if (triplet.jumps.finite_activity()) return triplet;
  LevyTriplet out = triplet;
  out.jumps = triplet.jumps.truncated(eps);
  if (gaussian_correction) {
    out.gauss(0, 0) += small_jump_variance(triplet.jumps, eps);
  }
  return out;
}

}  // namespace levyopt
