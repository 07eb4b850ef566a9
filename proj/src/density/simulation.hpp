#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "core/tabulated.hpp"
#include "density/density_engine.hpp"

namespace levyopt {

std::uint64_t splitmix64(std::uint64_t x);
/// Per-path seed: independent of how many paths are drawn.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index);

/// Draws jump sizes from a finite jump measure normalised to a probability.
/// Gaussian and double-exponential densities are sampled exactly; a tilt Y nu
/// with bounded Y uses rejection from nu; anything else falls back to an
/// inverse CDF tabulation.
class JumpSampler {
 public:
  explicit JumpSampler(const JumpMeasure& nu);

  /// Total mass (jump intensity).
  double mass() const noexcept { return mass_; }
  bool exact() const noexcept { return mode_ != Mode::Tabulated; }
  Vector sample(std::mt19937_64& rng) const;

 private:
  enum class Mode { Empty, Atoms, Base, Rejection, Tabulated };
  double sample_base(std::mt19937_64& rng) const;

  JumpMeasure nu_;
  Mode mode_ = Mode::Empty;
  double mass_ = 0.0;
  double bound_ = 1.0;  // sup Y for rejection
  mutable std::discrete_distribution<std::size_t> atom_index_;
  std::shared_ptr<const TabulatedJumps> table_;
};

/// One simulated path on a regular grid augmented by jump times. Every jump
/// contributes two nodes at the same time: its left limit and the post-jump
/// state. Continuous parts are those of the simulating measure.
struct SimulatedPath {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  MeasureTag tag = MeasureTag::P;
  int dim = 1;
  std::vector<double> t;
  std::vector<double> X;   // node-major, dim per node
  std::vector<double> Xc;  // continuous martingale part under `tag`
  std::vector<double> S;
  std::vector<double> Z;
  std::vector<double> jump;     // Delta X at post-jump nodes, else 0
  std::vector<char> is_jump;    // post-jump node
  std::vector<int> regular;     // grid index k for regular nodes, else -1

  std::size_t nodes() const noexcept { return t.size(); }
  double x(std::size_t k, int i) const { return X[k * dim + i]; }
  double xc(std::size_t k, int i) const { return Xc[k * dim + i]; }
  double s(std::size_t k, int i) const { return S[k * dim + i]; }
  double dx(std::size_t k, int i) const { return jump[k * dim + i]; }
  std::span<const double> jump_at(std::size_t k) const {
    return {jump.data() + k * dim, static_cast<std::size_t>(dim)};
  }
  /// Terminal node index.
  std::size_t last() const noexcept { return t.size() - 1; }
};

/// Simulates X (discounted log-prices) under P or Q together with Z = dQ/dP
/// from the product formula
///   Z_t = exp(<beta, X^{c,P}_t> - v t / 2 - t int (Y - 1) dnu) prod Y(Delta X).
class PathSimulator {
 public:
  PathSimulator(const LevyTriplet& p_triplet, const GirsanovPair& pair, Vector spot,
                double horizon, int steps, MeasureTag tag, std::uint64_t master_seed);

  SimulatedPath path(std::uint64_t index) const;

  const LevyTriplet& simulation_triplet() const noexcept { return sim_; }
  const LevyTriplet& p_triplet() const noexcept { return p_; }
  const GirsanovPair& pair() const noexcept { return pair_; }
  double horizon() const noexcept { return T_; }
  int steps() const noexcept { return steps_; }
  MeasureTag tag() const noexcept { return tag_; }
  const Vector& spot() const noexcept { return spot_; }
  /// int (Y - 1) dnu under P.
  double compensator() const noexcept { return comp_; }
  /// Drift of the raw compound-Poisson representation, b - int h dnu.
  const Vector& raw_drift() const noexcept { return b0_; }
  const JumpSampler& sampler() const noexcept { return *sampler_; }

 private:
  LevyTriplet p_;
  LevyTriplet sim_;
  GirsanovPair pair_;
  Vector spot_;
  double T_;
  int steps_;
  MeasureTag tag_;
  std::uint64_t master_;
  Vector b0_;
  Matrix chol_;
  Vector cbeta_;
  double v_ = 0.0;
  double comp_ = 0.0;
  std::shared_ptr<const JumpSampler> sampler_;
};

std::vector<SimulatedPath> simulate_paths(const PathSimulator& sim, std::uint64_t n_paths,
                                          std::uint64_t first_index = 0);

}  // namespace levyopt
