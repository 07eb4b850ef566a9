#include <cmath>

#include "core/errors.hpp"
#include "support.hpp"

using namespace levyopt;
using namespace levyopt::testing;

namespace {

MarketModel market(const LevyTriplet& tr) {
  MarketModel m;
  m.name = "test";
  m.triplet = tr;
  m.spot = Vector::Ones(tr.dim);
  return m;
}

bool has_issue(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& s : issues)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::vector<LevyTriplet> sample_triplets() {
  return {black_scholes(), merton(), kou(), single_atom(),
          {1, vec({0.03}), Matrix::Constant(1, 1, 0.01),
           JumpMeasure::density(JumpDensity(TemperedStableJumps{0.5, 5.0, 6.0, 0.8}))}};
}

}  // namespace

TEST_CASE("levy exponent examples") {
  const LevyTriplet g{1, vec({0.0}), Matrix::Constant(1, 1, 0.04), JumpMeasure::none(1)};
  ComplexVector u(1);
  u[0] = 1.0;
  const auto psi = levy_exponent(g, u);
  CHECK(psi.real() == doctest::Approx(-0.02).epsilon(1e-15));
  CHECK(psi.imag() == 0.0);

  u[0] = 0.0;
  for (const auto& tr : sample_triplets()) {
    const auto z = levy_exponent(tr, u);
    CHECK(z.real() == 0.0);
    CHECK(z.imag() == 0.0);
  }
}

TEST_CASE("levy exponent of a finite atom list by direct summation") {
  const LevyTriplet tr{1, vec({0.1}), Matrix::Constant(1, 1, 0.02),
                       JumpMeasure::atoms({{vec({-0.3}), 0.7}, {vec({1.4}), 0.2}})};
  for (double u : {0.3, 1.0, 2.5}) {
    const std::complex<double> iu(0.0, u);
    std::complex<double> expect = iu * 0.1 - 0.5 * 0.02 * u * u;
    expect += 0.7 * (std::exp(iu * -0.3) - 1.0 - iu * -0.3);
    expect += 0.2 * (std::exp(iu * 1.4) - 1.0);  // |1.4| > 1, no compensation
    ComplexVector uv(1);
    uv[0] = u;
    const auto got = levy_exponent(tr, uv);
    CHECK(std::abs(got - expect) < 1e-13);
  }
}

TEST_CASE("levy exponent of a Gaussian jump density matches the closed form") {
  // Merton jumps straddle the truncation boundary; use a narrow law so the
  // mass beyond |y| = 1 is negligible compared with the tolerance.
  const LevyTriplet tr{1, vec({0.0}), Matrix::Zero(1, 1),
                       JumpMeasure::density(JumpDensity(GaussianJumps{2.0, 0.05, 0.1}))};
  for (double u : {0.5, 2.0, 5.0}) {
    const std::complex<double> iu(0.0, u);
    const auto cf = std::exp(iu * 0.05 - 0.5 * 0.01 * u * u);
    const std::complex<double> expect = 2.0 * (cf - 1.0 - iu * 0.05);
    ComplexVector uv(1);
    uv[0] = u;
    CHECK(std::abs(levy_exponent(tr, uv) - expect) < 1e-9);
  }
}

TEST_CASE("levy exponent symmetry and additivity") {
  for (const auto& tr : sample_triplets()) {
    for (double u : {0.2, 1.0, 3.0, 7.0}) {
      ComplexVector a(1), b(1);
      a[0] = u;
      b[0] = -u;
      const auto pa = levy_exponent(tr, a);
      const auto pb = levy_exponent(tr, b);
      CHECK(std::abs(pb - std::conj(pa)) < 1e-11 * std::max(1.0, std::abs(pa)));
    }
  }
  // (b1, c1, atoms1) + (b2, c2, atoms2) superposes to (b1+b2, c1+c2, atoms1 u atoms2).
  const LevyTriplet t1{1, vec({0.02}), Matrix::Constant(1, 1, 0.03),
                       JumpMeasure::atoms({{vec({-0.2}), 1.0}})};
  const LevyTriplet t2{1, vec({-0.01}), Matrix::Constant(1, 1, 0.01),
                       JumpMeasure::atoms({{vec({0.4}), 0.5}, {vec({-1.5}), 0.1}})};
  const LevyTriplet sum{1, vec({0.01}), Matrix::Constant(1, 1, 0.04),
                        JumpMeasure::atoms({{vec({-0.2}), 1.0}, {vec({0.4}), 0.5},
                                            {vec({-1.5}), 0.1}})};
  for (double u : {0.1, 0.9, 4.0}) {
    ComplexVector uv(1);
    uv[0] = u;
    const auto lhs = levy_exponent(sum, uv);
    const auto rhs = levy_exponent(t1, uv) + levy_exponent(t2, uv);
    CHECK(std::abs(lhs - rhs) < 1e-14);
  }
  const auto bs = black_scholes(0.01, 0.02);
  const LevyTriplet jumps_only{1, vec({0.0}), Matrix::Zero(1, 1), merton().jumps};
  const LevyTriplet both{1, vec({0.01}), Matrix::Constant(1, 1, 0.02), merton().jumps};
  for (double u : {0.5, 2.0}) {
    ComplexVector uv(1);
    uv[0] = u;
    CHECK(std::abs(levy_exponent(both, uv) - levy_exponent(bs, uv) - levy_exponent(jumps_only, uv)) <
          1e-12);
  }
}

TEST_CASE("two-dimensional Gaussian exponent") {
  Matrix c(2, 2);
  c << 0.04, 0.01, 0.01, 0.09;
  const LevyTriplet tr{2, vec({0.05, -0.02}), c, JumpMeasure::none(2)};
  ComplexVector u(2);
  u << 1.0, -2.0;
  const Vector ur = u.real();
  const std::complex<double> expect(-0.5 * ur.dot(c * ur), ur.dot(tr.drift));
  CHECK(std::abs(levy_exponent(tr, u) - expect) < 1e-15);
}

TEST_CASE("single atom: E[exp(X_1)] = 1 by Monte Carlo") {
  const double y = -0.2;
  const double b = -(std::expm1(y) - y);  // psi_L(1) = 0
  const auto tr = single_atom(y, 1.0, b);
  CHECK(std::abs(laplace_exponent(tr, vec({1.0}))) < 1e-15);
  const auto pair = make_pair(tr, DivergenceSpec::log(), vec({0.0}));
  PathSimulator sim(tr, pair, ones(), 1.0, 1, MeasureTag::P, 123);
  const auto est = mc_expectation(sim, 100000, [](const SimulatedPath& p) { return p.S[p.last()]; }, 1.0);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.z_score) < 3.0);
}

TEST_CASE("validate_model diagnostics") {
  CHECK(validate_model(market(black_scholes())).empty());
  CHECK(validate_model(market(merton())).empty());

  auto bad = black_scholes();
  bad.gauss(0, 0) = -0.04;
  CHECK(has_issue(validate_model(market(bad)), "gauss_c not PSD"));

  Matrix c(2, 2);
  c << 0.04, 0.1, 0.1, 0.04;  // eigenvalues 0.14, -0.06
  CHECK(has_issue(validate_model(market({2, vec({0.0, 0.0}), c, JumpMeasure::none(2)})),
                  "gauss_c not PSD"));

  auto singular = [](double exponent) {
    return market({1, vec({0.0}), Matrix::Zero(1, 1),
                   JumpMeasure::density(JumpDensity(PowerLawJumps{1.0, exponent, 1.0}))});
  };
  CHECK(has_issue(validate_model(singular(3.5)), "min(1,|y|^2)"));
  CHECK(has_issue(validate_model(singular(3.0)), "min(1,|y|^2)"));
  CHECK(validate_model(singular(2.5)).empty());

  auto model = market(black_scholes());
  model.spot = vec({-1.0});
  CHECK(has_issue(validate_model(model), "spot"));
  model = market(black_scholes());
  model.horizon = 0.0;
  CHECK(has_issue(validate_model(model), "horizon"));
  CHECK(has_issue(validate_model(market(single_atom(-0.2, -1.0))), "atom"));
}

TEST_CASE("second-moment integral of |y|^-3.5 diverges by quadrature") {
  // int_delta^1 y^2 y^-3.5 dy = 2 (delta^-1/2 - 1): unbounded as delta -> 0
  double prev = 0.0;
  for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
    // y = e^s
    const double v =
        integrate_interval([](double s) { return std::exp(-0.5 * s); }, std::log(delta), 0.0);
    CHECK(v == doctest::Approx(2.0 * (1.0 / std::sqrt(delta) - 1.0)).epsilon(1e-7));
    CHECK(v > 9.0 * prev);
    prev = v;
  }
}

TEST_CASE("laplace exponent and divergence") {
  const auto bs = black_scholes(0.05, 0.04);
  const double w = 0.7;
  CHECK(laplace_exponent(bs, vec({w})) == doctest::Approx(0.05 * w + 0.02 * w * w).epsilon(1e-15));
  const auto k = kou();
  CHECK(std::isfinite(laplace_exponent(k, vec({5.0}))));
  CHECK_THROWS_AS(laplace_exponent(k, vec({11.0})), DivergentIntegralError);
  CHECK_THROWS_AS(laplace_exponent(k, vec({-9.0})), DivergentIntegralError);
  // direct quadrature of the Kou density as the oracle
  const double expect =
      0.01 * 2.0 + 0.5 * 0.04 * 4.0 +
      integrate_interval(
          [&](double y) {
            const double n = y > 0 ? 0.4 * 10.0 * std::exp(-10.0 * y) : 0.6 * 8.0 * std::exp(8.0 * y);
            return (std::exp(2.0 * y) - 1.0 - (std::abs(y) <= 1.0 ? 2.0 * y : 0.0)) * n;
          },
          -12.0, 0.0) +
      integrate_interval(
          [&](double y) {
            const double n = 0.4 * 10.0 * std::exp(-10.0 * y);
            return (std::exp(2.0 * y) - 1.0 - (std::abs(y) <= 1.0 ? 2.0 * y : 0.0)) * n;
          },
          0.0, 12.0);
  CHECK(laplace_exponent(k, vec({2.0})) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("small-jump truncation") {
  const JumpMeasure nu = JumpMeasure::density(JumpDensity(PowerLawJumps{1.0, 2.5, 1.0}));
  // 2 int_0^eps y^2 y^-2.5 dy = 2 eps^0.5 / 0.5
  CHECK(small_jump_variance(nu, 0.01) == doctest::Approx(0.4).epsilon(1e-8));
  const LevyTriplet tr{1, vec({0.02}), Matrix::Constant(1, 1, 0.01), nu};
  const auto cut = truncate_small_jumps(tr, 0.01, true);
  CHECK(cut.drift[0] == 0.02);
  CHECK(cut.gauss(0, 0) == doctest::Approx(0.41).epsilon(1e-8));
  CHECK(cut.jumps.finite_activity());
  CHECK(truncate_small_jumps(tr, 0.01, false).gauss(0, 0) == 0.01);
  const auto fin = merton();
  CHECK(truncate_small_jumps(fin, 0.01, true).gauss(0, 0) == fin.gauss(0, 0));
}

TEST_CASE("discounting") {
  auto m = market(black_scholes(0.05, 0.04));
  m.rate = 0.03;
  CHECK(discounted_triplet(m).drift[0] == doctest::Approx(0.02));
}
