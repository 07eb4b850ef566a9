#pragma once

#include <string>
#include <vector>

#include "density/simulation.hpp"

namespace levyopt {

enum class StrategyBranch { Diffusive, PureJump };

/// How phi-hat is evaluated. All three coincide whenever the theory says so:
///   Theorem   -lambda coef_i Z xi_t(lambda Z) / S_i
///   Unified   a alpha(x) coef_i Z^{gamma+1} e^{-t kappa} / S_i
///   Printed   alpha(x) beta_i Z^{gamma+1} e^{-t kappa} / S_i  (no factor a)
enum class StrategyForm { Theorem, Unified, Printed };

struct GammaConstants {
  Vector analytic;
  Vector finite_difference;
  double discrepancy = 0.0;
  Vector y0;
  std::string note;
};

struct StrategySolution {
  DivergenceSpec spec;
  GirsanovPair pair;
  LevyTriplet triplet;  // discounted, under P
  double horizon = 1.0;
  double capital = 1.0;
  double lambda = 1.0;
  double kappa_g1 = 0.0;  // kappa_Q(gamma + 1)
  double q_mean = 0.0;    // Q-mean rate of log Z
  StrategyBranch branch = StrategyBranch::Diffusive;
  /// beta on the diffusive branch, the gamma constants on the pure-jump one.
  Vector coef;
  std::vector<std::string> notes;

  /// kappa_Q(gamma+1), or the Q-mean rate on the gamma = -1 branch.
  double rho_rate() const { return spec.log_branch() ? q_mean : kappa_g1; }
};

/// Closed-form lambda from E_Q[-f'(lambda Z_T)] = x.
double solve_lambda(const DivergenceSpec& spec, double kappa_g1, double q_mean, double x,
                    double T);
/// Same equation by bisection in log lambda on the moment-based objective.
double solve_lambda_bisection(const DivergenceSpec& spec, double kappa_g1, double q_mean,
                              double x, double T);
/// E_Q[-f'(lambda Z_T)] from the moment curve.
double expected_inverse_marginal(const DivergenceSpec& spec, double lambda, double kappa_g1,
                                 double q_mean, double T);

/// gamma^{(i)} = e^{-y0_i} Y(y0)^gamma dY/dy_i(y0): analytic and by central
/// differences. Requires c = 0 and y0 inside the support.
GammaConstants compute_gamma_constants(const LevyTriplet& triplet, const DivergenceSpec& spec,
                                       const GirsanovPair& pair, const Vector& y0);

/// Calibrates lambda and picks the branch. y0 only matters for c = 0.
StrategySolution make_strategy(const LevyTriplet& triplet, const DivergenceSpec& spec,
                               const GirsanovPair& pair, double capital, double T,
                               const Vector* y0 = nullptr);

/// Shares held in each asset at time t given left limits Z_{t-}, S_{t-}.
Vector strategy_at(const StrategySolution& sol, double t, double Z_minus,
                   const Vector& S_minus, StrategyForm form = StrategyForm::Theorem);
/// Throws ConfigError when `expected` is not the solution's branch.
Vector strategy_at(const StrategySolution& sol, StrategyBranch expected, double t,
                   double Z_minus, const Vector& S_minus);
/// Same, with the coefficient vector overridden (arbiter candidates).
Vector strategy_with_coef(const StrategySolution& sol, const Vector& coef, double t,
                          double Z_minus, const Vector& S_minus);

/// rho(t, x) for this solution.
double solution_rho(const StrategySolution& sol, double t, double x);

struct WealthSeries {
  std::vector<double> t;
  std::vector<double> closed;  // -rho(t, Z_t)
  std::vector<double> euler;   // x + sum phi . Delta S
  std::vector<double> residual;
  std::vector<std::size_t> node;  // path node index of each entry
  double terminal_identity = 0.0;  // x + (phi . S)_T + f'(lambda Z_T)
};

/// Which path nodes a coarse pass visits: regular nodes with k % stride == 0
/// and every jump node (left limit and post-jump).
std::vector<std::size_t> stride_nodes(const SimulatedPath& path, int stride);

WealthSeries wealth_process(const StrategySolution& sol, const SimulatedPath& path,
                            int stride = 1);
/// Euler wealth with a custom coefficient vector; terminal value only.
double euler_terminal_wealth(const StrategySolution& sol, const Vector& coef,
                             const SimulatedPath& path, int stride = 1);

struct TruncatedOutcome {
  bool stopped_before_T = false;
  double stop_time = 0.0;
  double terminal_wealth = 0.0;
};

/// phi-hat 1{t <= tau_n}, tau_n = first node with lambda Z >= n or <= 1/n.
TruncatedOutcome truncated_strategy(const StrategySolution& sol, const SimulatedPath& path,
                                    double n, int stride = 1);

}  // namespace levyopt
