#pragma once

#include <functional>
#include <string>
#include <vector>

#include "strategy/strategy_engine.hpp"

namespace levyopt {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  double target = 0.0;
  double z_score = 0.0;

  bool within(double k) const { return std::abs(z_score) < k; }
};

/// Welford accumulator.
class McAccumulator {
 public:
  void add(double x);
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  McEstimate estimate(double target) const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// E[g(path)] over paths [0, n) of `sim`.
McEstimate mc_expectation(const PathSimulator& sim, std::uint64_t n_paths,
                          const std::function<double(const SimulatedPath&)>& g, double target);

struct MartingaleReport {
  McEstimate terminal;             // S_i(T) against S_i(0)
  std::vector<McEstimate> drifts;  // S_i(t_{k+1}) / S_i(t_k) - 1 against 0
};

/// MC check that S_i is a martingale under the simulator's measure.
MartingaleReport martingale_check(const PathSimulator& q_sim, int asset, std::uint64_t n_paths);

struct RefinementStudy {
  std::vector<int> strides;  // coarsest first
  std::vector<double> dt;
  std::vector<double> rms;
  /// rms[k] / rms[k+1] for consecutive halvings.
  std::vector<double> ratios() const;
  bool decays(double factor) const;
};

/// RMS of x + (phi . S)_T + f'(lambda Z_T) for each stride (common paths).
RefinementStudy terminal_identity_study(const StrategySolution& sol, const PathSimulator& sim,
                                        std::uint64_t n_paths, const std::vector<int>& strides);

struct RepresentationReport {
  std::vector<double> times;
  RefinementStudy overall;  // RMS pooled over `times`
  /// rms_at[s][j]: stride s, time j.
  std::vector<std::vector<double>> rms_at;
  double max_abs_at_zero = 0.0;
  /// max |rho(t, Z_t) - rho(t, Z_t-) - H_t(lambda Z_t-, Delta X)| over jumps.
  double max_jump_error = 0.0;
  std::uint64_t jumps_seen = 0;
};

/// rho(t, Z_t) against rho(0, 1) + continuous Euler sum + jump sum minus the
/// Q-compensator of H on the grid.
RepresentationReport representation_residual(const StrategySolution& sol,
                                             const PathSimulator& sim, std::uint64_t n_paths,
                                             const std::vector<int>& strides,
                                             const std::vector<double>& times);

struct ScalingCandidate {
  std::string label;
  Vector coef;
  double rms = 0.0;  // replication residual: Euler wealth + rho(t, Z_t)
};

struct ScalingArbiter {
  std::vector<ScalingCandidate> candidates;
  std::size_t selected = 0;
};

/// c = 0 branch: compare phi-hat built from the gamma constants with the one
/// built from beta, against the representation of -rho(t, Z_t).
ScalingArbiter arbitrate_scaling(const StrategySolution& sol, const PathSimulator& sim,
                                 std::uint64_t n_paths, int stride = 1);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
double kolmogorov_survival(double lambda);

struct PreservationReport {
  double window = 0.0;
  KsResult stationarity;    // first vs last window increments
  double correlation = 0.0;  // adjacent windows
  double correlation_p = 1.0;
  McEstimate mean_increment;  // against the triplet mean
  McEstimate var_increment;   // against the triplet variance
  bool passed(double alpha = 0.01) const {
    return stationarity.p_value > alpha && correlation_p > alpha;
  }
};

/// `ramp` > 0 adds ramp * t^2 to log-prices (a deliberately time-inhomogeneous
/// corruption for power checks).
PreservationReport levy_preservation_test(const PathSimulator& sim, std::uint64_t n_paths,
                                          int windows = 4, double ramp = 0.0);

struct DominanceRow {
  std::string label;
  double proportion = 0.0;
  bool admissible = true;
  McEstimate utility;
  double paired_diff = 0.0;  // E[u(V-hat) - u(V_pi)]
  double paired_se = 0.0;
  bool dominated = true;  // paired_diff >= -3 paired_se
};

struct DominanceTable {
  DominanceRow optimal;
  std::vector<DominanceRow> rows;
  double best_proportion = 0.0;
  bool all_dominated() const;
};

/// E_P[u(V_T)] for phi-hat (Euler) and for every constant wealth fraction
/// (rebalanced on the same nodes); asset 0 carries the proportion.
DominanceTable utility_dominance_scan(const StrategySolution& sol, const PathSimulator& p_sim,
                                      const std::vector<double>& proportions,
                                      std::uint64_t n_paths, int stride = 1,
                                      const Vector* coef = nullptr);

struct TruncationRow {
  double n = 0.0;
  double stopped_fraction = 0.0;
  McEstimate utility;
};

std::vector<TruncationRow> truncation_study(const StrategySolution& sol,
                                            const PathSimulator& p_sim,
                                            const std::vector<double>& levels,
                                            std::uint64_t n_paths, int stride = 1);

}  // namespace levyopt
