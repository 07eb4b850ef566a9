#include "density/simulation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace levyopt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

namespace {

// sup of Y over [lo, hi]; Y is monotone in y so the ends decide.
double sup_ratio(const JumpRatio& ratio, double lo, double hi) {
  const double b = ratio.beta()[0];
  const auto& spec = ratio.spec();
  auto at = [&](double y) {
    if (y == -std::numeric_limits<double>::infinity()) {
      return spec.fprime_inverse(spec.fprime_at_1() - b);
    }
    if (y == std::numeric_limits<double>::infinity()) {
      if (b == 0.0) return 1.0;
      return b < 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return ratio.value(y);
  };
  return std::max(at(lo), at(hi));
}

}  // namespace

JumpSampler::JumpSampler(const JumpMeasure& nu) : nu_(nu) {
  switch (nu.kind()) {
    case JumpMeasure::Kind::None:
      mode_ = Mode::Empty;
      return;
    case JumpMeasure::Kind::Atoms: {
      mode_ = Mode::Atoms;
      std::vector<double> w;
      for (const auto& a : nu.atom_list()) {
        w.push_back(a.weight);
        mass_ += a.weight;
      }
      atom_index_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
      return;
    }
    case JumpMeasure::Kind::Density:
      break;
  }
  if (!nu.finite_activity()) {
    throw ConfigError("simulation needs a finite-activity jump measure (truncate first)");
  }
  if (nu.log_map()) throw ConfigError("cannot sample a log-mapped jump measure");
  const auto& shape = nu.density_shape().shape();
  const bool exact_base = nu.inner_cutoff() == 0.0 &&
                          (std::holds_alternative<GaussianJumps>(shape) ||
                           std::holds_alternative<DoubleExponentialJumps>(shape));
  if (exact_base && !nu.tilt()) {
    mode_ = Mode::Base;
    if (const auto* g = std::get_if<GaussianJumps>(&shape)) mass_ = g->intensity;
    if (const auto* k = std::get_if<DoubleExponentialJumps>(&shape)) mass_ = k->intensity;
    return;
  }
  mass_ = integrate_jumps(nu, [](std::span<const double>) { return 1.0; },
                          TailGrowth::bounded());
  if (exact_base) {
    const double sup = sup_ratio(*nu.tilt(), nu.density_shape().lower(),
                                 nu.density_shape().upper());
    if (std::isfinite(sup) && sup <= 100.0) {
      mode_ = Mode::Rejection;
      bound_ = std::max(sup, 1e-300);
      return;
    }
  }
  mode_ = Mode::Tabulated;
  table_ = std::make_shared<const TabulatedJumps>(nu, 20000);
}

double JumpSampler::sample_base(std::mt19937_64& rng) const {
  const auto& shape = nu_.density_shape().shape();
  if (const auto* g = std::get_if<GaussianJumps>(&shape)) {
    return std::normal_distribution<double>(g->mean, g->stddev)(rng);
  }
  const auto& k = std::get<DoubleExponentialJumps>(shape);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < k.p_up) return std::exponential_distribution<double>(k.eta_up)(rng);
  return -std::exponential_distribution<double>(k.eta_down)(rng);
}

Vector JumpSampler::sample(std::mt19937_64& rng) const {
  switch (mode_) {
    case Mode::Empty:
      throw Error("JumpSampler: no jumps to sample");
    case Mode::Atoms:
      return nu_.atom_list()[atom_index_(rng)].location;
    case Mode::Base:
      return Vector::Constant(1, sample_base(rng));
    case Mode::Rejection: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (;;) {
        const double y = sample_base(rng);
        if (unif(rng) * bound_ <= nu_.tilt()->value(y)) return Vector::Constant(1, y);
      }
    }
    case Mode::Tabulated:
      return Vector::Constant(1, table_->sample(rng));
  }
  return Vector();
}

PathSimulator::PathSimulator(const LevyTriplet& p_triplet, const GirsanovPair& pair,
                             Vector spot, double horizon, int steps, MeasureTag tag,
                             std::uint64_t master_seed)
    : p_(p_triplet),
      pair_(pair),
      spot_(std::move(spot)),
      T_(horizon),
      steps_(steps),
      tag_(tag),
      master_(master_seed) {
  if (steps_ < 1) throw ConfigError("simulation grid needs at least one step");
  if (!(T_ > 0.0)) throw ConfigError("simulation horizon must be positive");
  if (!p_.jumps.finite_activity()) {
    throw ConfigError("simulation needs a finite-activity jump measure (truncate first)");
  }
  const int d = p_.dim;
  sim_ = tag == MeasureTag::P ? p_ : q_triplet(p_, pair_);
  b0_ = sim_.drift;
  if (!sim_.jumps.empty()) {
    for (int i = 0; i < d; ++i) {
      b0_[i] -= integrate_jumps(sim_.jumps, [i](std::span<const double> y) {
        return truncation_weight(y) > 0.0 ? y[i] : 0.0;
      });
    }
    comp_ = integrate_jumps(p_.jumps, [&](std::span<const double> y) {
      return pair_.ratio.minus_one(y);
    }, max(pair_.ratio.growth(), TailGrowth::bounded()));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(p_.gauss);
  chol_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  cbeta_ = p_.gauss * pair_.beta;
  v_ = pair_.beta.dot(cbeta_);
  sampler_ = std::make_shared<const JumpSampler>(sim_.jumps);
}

SimulatedPath PathSimulator::path(std::uint64_t index) const {
  const int d = p_.dim;
  SimulatedPath p;
  p.index = index;
  p.seed = path_seed(master_, index);
  p.tag = tag_;
  p.dim = d;
  std::mt19937_64 rng(p.seed);

  std::vector<double> jump_times;
  std::vector<Vector> jump_sizes;
  if (sampler_->mass() > 0.0) {
    const auto n = std::poisson_distribution<long>(sampler_->mass() * T_)(rng);
    std::uniform_real_distribution<double> unif(0.0, T_);
    for (long j = 0; j < n; ++j) jump_times.push_back(unif(rng));
    std::sort(jump_times.begin(), jump_times.end());
    for (long j = 0; j < n; ++j) jump_sizes.push_back(sampler_->sample(rng));
  }

  const std::size_t reserve = static_cast<std::size_t>(steps_) + 1 + 2 * jump_times.size();
  p.t.reserve(reserve);
  p.X.reserve(reserve * d);
  p.Xc.reserve(reserve * d);
  p.S.reserve(reserve * d);
  p.Z.reserve(reserve);
  p.jump.reserve(reserve * d);
  p.is_jump.reserve(reserve);
  p.regular.reserve(reserve);

  Vector X = Vector::Zero(d);
  Vector Xc = Vector::Zero(d);
  double log_jumps = 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector noise(d);
  const double gtilt = -0.5 * v_ - comp_;

  auto push = [&](double t, int reg, const Vector* dx) {
    p.t.push_back(t);
    const Vector xcp = tag_ == MeasureTag::P ? Xc : Vector(Xc + cbeta_ * t);
    const double lz = pair_.beta.dot(xcp) + gtilt * t + log_jumps;
    for (int i = 0; i < d; ++i) {
      p.X.push_back(X[i]);
      p.Xc.push_back(Xc[i]);
      p.S.push_back(spot_[i] * std::exp(X[i]));
      p.jump.push_back(dx ? (*dx)[i] : 0.0);
    }
    p.Z.push_back(std::exp(lz));
    p.is_jump.push_back(dx ? 1 : 0);
    p.regular.push_back(reg);
  };

  push(0.0, 0, nullptr);
  double t_prev = 0.0;
  std::size_t j = 0;
  auto advance = [&](double t_new) {
    const double dt = t_new - t_prev;
    if (dt > 0.0) {
      for (int i = 0; i < d; ++i) noise[i] = normal(rng);
      const Vector dxc = chol_ * noise * std::sqrt(dt);
      Xc += dxc;
      X += b0_ * dt + dxc;
    }
    t_prev = t_new;
  };
  for (int k = 1; k <= steps_; ++k) {
    const double tk = k == steps_ ? T_ : T_ * k / steps_;
    while (j < jump_times.size() && jump_times[j] < tk) {
      advance(jump_times[j]);
      push(t_prev, -1, nullptr);
      X += jump_sizes[j];
      log_jumps += pair_.ratio.log_value(
          std::span<const double>(jump_sizes[j].data(), jump_sizes[j].size()));
      push(t_prev, -1, &jump_sizes[j]);
      ++j;
    }
    advance(tk);
    push(tk, k, nullptr);
  }
  return p;
}

std::vector<SimulatedPath> simulate_paths(const PathSimulator& sim, std::uint64_t n_paths,
                                          std::uint64_t first_index) {
  std::vector<SimulatedPath> out;
  out.reserve(n_paths);
  for (std::uint64_t i = 0; i < n_paths; ++i) out.push_back(sim.path(first_index + i));
  return out;
}

}  // namespace levyopt
