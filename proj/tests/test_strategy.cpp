#include <cmath>
#include <random>

#include "core/errors.hpp"
#include "support.hpp"

using namespace levyopt;
using namespace levyopt::testing;

namespace {

StrategySolution solve(const LevyTriplet& tr, const DivergenceSpec& spec, double x = 1.0,
                       double T = 1.0) {
  return make_strategy(tr, spec, solve_beta(tr, spec), x, T);
}

struct State {
  double t, Z, S;
};

std::vector<State> random_states(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> t(0.0, 1.0), lz(-1.5, 1.5), ls(-0.7, 0.7);
  std::vector<State> out;
  for (int i = 0; i < n; ++i) out.push_back({t(rng), std::exp(lz(rng)), std::exp(ls(rng))});
  return out;
}

LevyTriplet martingale_merton() {
  auto m = merton(0.0);
  m.drift[0] = -laplace_exponent(m, vec({1.0}));
  return m;
}

}  // namespace

TEST_CASE("lambda calibration") {
  CHECK(solve(black_scholes(), DivergenceSpec::log(), 2.0).lambda == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(solve(merton(), DivergenceSpec::log(), 2.0).lambda == doctest::Approx(0.5).epsilon(1e-12));
  const auto m = martingale_merton();
  const auto id = make_strategy(m, DivergenceSpec::exponential(), make_pair(m, DivergenceSpec::exponential(), vec({0.0})), 0.0, 1.0);
  CHECK(id.lambda == doctest::Approx(1.0).epsilon(1e-14));
  // exponential: lambda = exp(-x - f'(1) - T m)
  const auto e = solve(merton(), DivergenceSpec::exponential(), 0.7, 2.0);
  CHECK(e.lambda == doctest::Approx(std::exp(-0.7 - 2.0 * e.q_mean)).epsilon(1e-14));

  for (const auto& tr : {black_scholes(), merton(), kou(), single_atom()}) {
    for (const auto& spec : presets()) {
      const auto pair = solve_beta(tr, spec);
      const DensityMomentCurve c(tr, pair.ratio, MeasureTag::Q);
      const double kg = c.kappa(spec.gamma() + 1.0), qm = c.q_mean_rate();
      for (double x : {0.3, 1.0, 4.0}) {
        const double l = solve_lambda(spec, kg, qm, x, 1.0);
        const double lb = solve_lambda_bisection(spec, kg, qm, x, 1.0);
        CHECK(std::abs(l - lb) <= 1e-9 * l);
        CHECK(expected_inverse_marginal(spec, l, kg, qm, 1.0) == doctest::Approx(x).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(solve(black_scholes(), DivergenceSpec::log(), 0.0), DomainError);
  CHECK_NOTHROW(solve(black_scholes(), DivergenceSpec::exponential(), -2.0));
}

TEST_CASE("Merton proportion") {
  const auto sol = solve(black_scholes(0.05, 0.04), DivergenceSpec::log(), 2.0);
  for (const auto& s : random_states(500, 1)) {
    const double shares = strategy_at(sol, s.t, s.Z, vec({s.S}))[0];
    const double wealth = -solution_rho(sol, s.t, s.Z);
    CHECK(wealth == doctest::Approx(2.0 / s.Z).epsilon(1e-13));
    CHECK(shares * s.S / wealth == doctest::Approx(1.75).epsilon(1e-12));
  }
}

TEST_CASE("exponential preset holds a constant amount") {
  for (const auto& tr : {black_scholes(), merton()}) {
    const auto sol = solve(tr, DivergenceSpec::exponential(), 0.4);
    for (const auto& s : random_states(200, 2)) {
      const double amount = strategy_at(sol, s.t, s.Z, vec({s.S}))[0] * s.S;
      CHECK(amount == doctest::Approx(-sol.pair.beta[0]).epsilon(1e-12));
    }
  }
  const auto bs = solve(black_scholes(), DivergenceSpec::exponential());
  CHECK(strategy_at(bs, 0.0, 1.0, vec({1.0}))[0] == doctest::Approx(1.75).epsilon(1e-12));
}

TEST_CASE("no position when P is already a martingale measure") {
  const auto m = martingale_merton();
  for (const auto& spec : presets()) {
    const auto sol = solve(m, spec);
    for (const auto& s : random_states(50, 3)) CHECK(std::abs(strategy_at(sol, s.t, s.Z, vec({s.S}))[0]) < 1e-12);
  }
}

TEST_CASE("Theorem, unified and printed forms") {
  for (const auto& tr : {black_scholes(), merton(), kou()}) {
    for (const auto& spec : presets()) {
      CAPTURE(spec.name());
      const auto sol = solve(tr, spec, 1.5);
      for (const auto& s : random_states(100, 4)) {
        const double th = strategy_at(sol, s.t, s.Z, vec({s.S}), StrategyForm::Theorem)[0];
        const double un = strategy_at(sol, s.t, s.Z, vec({s.S}), StrategyForm::Unified)[0];
        const double pr = strategy_at(sol, s.t, s.Z, vec({s.S}), StrategyForm::Printed)[0];
        CHECK(std::abs(th - un) <= 1e-10 * std::abs(th));
        CHECK(pr * spec.a() == doctest::Approx(th).epsilon(1e-10));
        if (spec.a() == 1.0) CHECK(pr == doctest::Approx(th).epsilon(1e-10));
      }
    }
  }
  const auto sol = solve(black_scholes(), DivergenceSpec::power(0.5));
  CHECK(strategy_at(sol, 0.2, 1.1, vec({1.0}), StrategyForm::Printed)[0] == doctest::Approx(0.5 * strategy_at(sol, 0.2, 1.1, vec({1.0}))[0]));
}

TEST_CASE("gamma constants") {
  const auto at = single_atom();
  for (const auto& spec : presets()) {
    CAPTURE(spec.name());
    const auto pair = solve_beta(at, spec);
    const auto g1 = compute_gamma_constants(at, spec, pair, vec({-0.2}));
    const auto g2 = compute_gamma_constants(at, spec, pair, vec({0.1}));
    CHECK(g1.analytic[0] == doctest::Approx(pair.beta[0] / spec.a()).epsilon(1e-12));
    CHECK(g1.discrepancy < 1e-6);
    CHECK(std::abs(g1.analytic[0] - g2.analytic[0]) < 1e-8);
    CHECK(std::abs(g1.finite_difference[0] - g2.finite_difference[0]) < 1e-8);
    CHECK_FALSE(g1.note.empty());
    const auto sol = make_strategy(at, spec, pair, 1.0, 1.0);
    CHECK(sol.branch == StrategyBranch::PureJump);
    CHECK(sol.coef[0] == doctest::Approx(g1.analytic[0]).epsilon(1e-14));
  }

  auto kj = kou(0.0, 0.0);
  kj.drift[0] = 0.02 - laplace_exponent(kj, vec({1.0}));
  const auto spec = DivergenceSpec::log();
  const auto kp = solve_beta(kj, spec);
  const auto a = compute_gamma_constants(kj, spec, kp, vec({-0.3}));
  const auto b = compute_gamma_constants(kj, spec, kp, vec({0.2}));
  CHECK(std::abs(a.analytic[0] - b.analytic[0]) < 1e-8);
  CHECK(a.discrepancy < 1e-6);

  const LevyTriplet bounded{1, vec({0.0}), Matrix::Zero(1, 1),
                            JumpMeasure::density(JumpDensity(PowerLawJumps{0.2, 0.5, 0.5}))};
  CHECK_THROWS_AS(compute_gamma_constants(bounded, spec, make_pair(bounded, spec, vec({0.0})), vec({0.8})),
                  DomainError);

  auto zero = single_atom(-0.2, 1.0, 0.0);
  zero.drift[0] = -laplace_exponent(zero, vec({1.0}));
  const auto zp = solve_beta(zero, spec);
  CHECK(std::abs(compute_gamma_constants(zero, spec, zp, vec({-0.2})).analytic[0]) < 1e-12);

  CHECK_THROWS_AS(compute_gamma_constants(merton(), spec, solve_beta(merton(), spec), vec({0.0})), ConfigError);
  const auto diff = solve(merton(), spec);
  CHECK_THROWS_AS(strategy_at(diff, StrategyBranch::PureJump, 0.0, 1.0, vec({1.0})), ConfigError);
  CHECK_NOTHROW(strategy_at(diff, StrategyBranch::Diffusive, 0.0, 1.0, vec({1.0})));
}

TEST_CASE("wealth process") {
  const auto m = merton();
  for (const auto& spec : {DivergenceSpec::log(), DivergenceSpec::exponential(), DivergenceSpec::power(0.5)}) {
    CAPTURE(spec.name());
    const double x = 1.3;
    const auto sol = solve(m, spec, x);
    const PathSimulator sim(m, sol.pair, ones(), 1.0, 50, MeasureTag::P, 21);
    for (std::uint64_t i = 0; i < 300; ++i) {
      const auto p = sim.path(i);
      const auto w = wealth_process(sol, p);
      CHECK(w.closed.front() == doctest::Approx(x).epsilon(1e-12));
      CHECK(w.euler.front() == x);
      if (spec.preset() == DivergencePreset::Log) {
        for (std::size_t k = 0; k < w.closed.size(); ++k)
          CHECK(w.closed[k] == doctest::Approx(x / p.Z[w.node[k]]).epsilon(1e-12));
      }
      if (!spec.log_branch()) {
        for (double v : w.closed) CHECK(v > spec.wealth_floor());
      }
      // u(V_T) = f(z) - z f'(z) with z = lambda Z_T
      const double z = sol.lambda * p.Z[p.last()];
      CHECK(spec.utility(w.closed.back()) ==
            doctest::Approx(spec.f(z) - z * spec.fprime(z)).epsilon(1e-8).scale(1e-8));
      CHECK(w.terminal_identity == doctest::Approx(w.euler.back() + spec.fprime(z)).epsilon(1e-12).scale(1e-14));
    }
  }
}

TEST_CASE("terminal residual shrinks under refinement") {
  const auto bs = black_scholes();
  const auto sol = solve(bs, DivergenceSpec::log(), 1.0);
  const PathSimulator sim(bs, sol.pair, ones(), 1.0, 200, MeasureTag::P, 31);
  const auto study = terminal_identity_study(sol, sim, 1000, {4, 2, 1});
  REQUIRE(study.rms.size() == 3);
  CHECK(study.rms[0] > study.rms[1]);
  CHECK(study.rms[1] > study.rms[2]);
}

TEST_CASE("truncated strategy") {
  const auto bs = black_scholes();
  const auto sol = make_strategy(bs, DivergenceSpec::log(), solve_beta(bs, DivergenceSpec::log()), 1.0, 0.1);
  const PathSimulator sim(bs, sol.pair, ones(), 0.1, 20, MeasureTag::P, 41);
  int stopped = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto p = sim.path(i);
    const auto far = truncated_strategy(sol, p, 1e6);
    if (far.stopped_before_T) ++stopped;
    if (i < 200) {
      CHECK(far.terminal_wealth == doctest::Approx(euler_terminal_wealth(sol, sol.coef, p)).epsilon(1e-13));
      const auto now = truncated_strategy(sol, p, 1.0 + 1e-9);
      CHECK(now.stopped_before_T);
      CHECK(now.stop_time <= 0.1 / 20 + 1e-15);
      CHECK(std::abs(now.terminal_wealth - 1.0) < 0.15);
    }
  }
  CHECK(stopped == 0);
  CHECK_THROWS_AS(truncated_strategy(sol, sim.path(0), 1.0), ConfigError);
}

TEST_CASE("truncation trend for the exponential preset") {
  const auto m = merton();
  const auto sol = solve(m, DivergenceSpec::exponential(), 0.5);
  const PathSimulator sim(m, sol.pair, ones(), 1.0, 50, MeasureTag::P, 51);
  const auto rows = truncation_study(sol, sim, {1.05, 1.2, 2.0, 8.0, 1e6}, 4000);
  REQUIRE(rows.size() == 5);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].stopped_fraction <= rows[k - 1].stopped_fraction);
    CHECK(rows[k].utility.mean >= rows[k - 1].utility.mean - 3.0 * rows[k].utility.std_error);
  }
  CHECK(rows.back().stopped_fraction == 0.0);
  CHECK(rows.front().stopped_fraction > 0.5);
  CHECK(rows.back().utility.mean > rows.front().utility.mean);
}
