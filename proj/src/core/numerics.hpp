#pragma once

#include <cmath>
#include <complex>

namespace levyopt {

/// e^x - 1 - x without cancellation for small x.
inline double exp_remainder(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return x2 * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x * (1.0 / 720)))));
  }
  return std::expm1(x) - x;
}

inline std::complex<double> exp_remainder(std::complex<double> z) {
  if (std::abs(z) < 1e-2) {
    return z * z * (0.5 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z * (1.0 / 720)))));
  }
  return std::exp(z) - 1.0 - z;
}

/// e^{kL} - 1 - k (e^L - 1), i.e. Y^k - 1 - k (Y - 1) with L = log Y.
inline double power_remainder(double k, double L) {
  if (std::abs(L) < 1e-3 && std::abs(k * L) < 1e-3) {
    // sum_{n >= 2} (k^n - k) L^n / n!
    double term = L;
    double kn = k;
    double sum = 0.0;
    for (int n = 2; n <= 7; ++n) {
      term *= L / n;
      kn *= k;
      sum += (kn - k) * term;
    }
    return sum;
  }
  return std::expm1(k * L) - k * std::expm1(L);
}

/// Y log Y - Y + 1 with L = log Y.
inline double entropy_remainder(double L) {
  if (std::abs(L) < 1e-3) {
    // sum_{n >= 2} (n - 1) L^n / n!
    double term = L;
    double sum = 0.0;
    for (int n = 2; n <= 7; ++n) {
      term *= L / n;
      sum += (n - 1) * term;
    }
    return sum;
  }
  return std::exp(L) * L - std::expm1(L);
}

/// Y log Y with L = log Y.
inline double y_log_y(double L) { return std::exp(L) * L; }

}  // namespace levyopt
