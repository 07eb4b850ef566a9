#include "core/jump_measure.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "core/errors.hpp"

namespace levyopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Substitution y = b e^{-t} near a singular origin: the remaining mass below
// e^{-t_max} is ~ e^{-(2 - index) t_max}, and exp(log n(y) + log y) must stay
// finite, which caps t_max.
double singular_t_max(double index) {
  return std::min(40.0 / (2.0 - index), 700.0 / std::max(index, 1.0));
}

}  // namespace

JumpMeasure JumpMeasure::none(int dim) {
  JumpMeasure m;
  m.kind_ = Kind::None;
  m.dim_ = dim;
  return m;
}

JumpMeasure JumpMeasure::atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ConfigError("jump measure: empty atom list");
  JumpMeasure m;
  m.kind_ = Kind::Atoms;
  m.dim_ = static_cast<int>(atoms.front().location.size());
  m.atoms_ = std::move(atoms);
  return m;
}

JumpMeasure JumpMeasure::density(JumpDensity density) {
  JumpMeasure m;
  m.kind_ = Kind::Density;
  m.dim_ = 1;
  m.density_ = std::make_shared<const JumpDensity>(std::move(density));
  return m;
}

const JumpDensity& JumpMeasure::density_shape() const {
  if (kind_ != Kind::Density) throw Error("jump measure has no density");
  return *density_;
}

JumpMeasure JumpMeasure::tilted(const JumpRatio& ratio) const {
  JumpMeasure out = *this;
  switch (kind_) {
    case Kind::None:
      return out;
    case Kind::Atoms:
      for (auto& atom : out.atoms_) {
        atom.weight *= ratio.value(std::span<const double>(atom.location.data(),
                                                           atom.location.size()));
      }
      return out;
    case Kind::Density:
      if (tilt_ || log_map_) throw Error("jump measure is already transformed");
      out.tilt_ = ratio;
      return out;
  }
  return out;
}

JumpMeasure JumpMeasure::log_pushforward(const JumpRatio& ratio) const {
  JumpMeasure out = *this;
  switch (kind_) {
    case Kind::None:
      out.dim_ = 1;
      return out;
    case Kind::Atoms: {
      std::vector<Atom> mapped;
      for (const auto& atom : atoms_) {
        const double z = ratio.log_value(
            std::span<const double>(atom.location.data(), atom.location.size()));
        if (z != 0.0) mapped.push_back({Vector::Constant(1, z), atom.weight});
      }
      if (mapped.empty()) return none(1);
      return atoms(std::move(mapped));
    }
    case Kind::Density:
      if (log_map_) throw Error("jump measure is already log-mapped");
      out.log_map_ = ratio;
      return out;
  }
  return out;
}

JumpMeasure JumpMeasure::truncated(double epsilon) const {
  JumpMeasure out = *this;
  if (kind_ == Kind::Atoms) {
    out.atoms_.clear();
    for (const auto& atom : atoms_) {
      if (atom.location.norm() > epsilon) out.atoms_.push_back(atom);
    }
    if (out.atoms_.empty()) return none(dim_);
  } else if (kind_ == Kind::Density) {
    out.inner_cutoff_ = std::max(inner_cutoff_, epsilon);
  }
  return out;
}

bool JumpMeasure::finite_activity() const {
  if (kind_ != Kind::Density) return true;
  return !density_->infinite_activity() || inner_cutoff_ > 0.0;
}

SupportDescriptor JumpMeasure::support() const {
  SupportDescriptor s;
  s.lower = Vector::Zero(dim_);
  s.upper = Vector::Zero(dim_);
  if (kind_ == Kind::Atoms) {
    s.lower = atoms_.front().location;
    s.upper = atoms_.front().location;
    for (const auto& atom : atoms_) {
      s.lower = s.lower.cwiseMin(atom.location);
      s.upper = s.upper.cwiseMax(atom.location);
    }
  } else if (kind_ == Kind::Density) {
    s.lower[0] = density_->lower();
    s.upper[0] = density_->upper();
    s.interior_contains_zero = s.lower[0] < 0.0 && s.upper[0] > 0.0 && inner_cutoff_ == 0.0;
  }
  return s;
}

double integrate_interval(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& opts,
                          double* error_estimate) {
  if (!(b > a)) {
    if (error_estimate) *error_estimate = 0.0;
    return 0.0;
  }
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
  };
  auto rule = [&](double lo, double hi) {
    Segment s{lo, hi, 0.0, 0.0};
    s.value = GK::integrate(f, lo, hi, 0, 0.0, &s.error);
    return s;
  };
  // Global adaptive bisection of the segment with the largest error.
  std::priority_queue<Segment> heap;
  heap.push(rule(a, b));
  double total = heap.top().value;
  double err = heap.top().error;
  const std::size_t max_segments = std::size_t{1} << std::min(opts.max_depth, 14u);
  while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) &&
         heap.size() < max_segments) {
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const Segment left = rule(worst.a, mid);
    const Segment right = rule(mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed accumulated rounding from the running updates.
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total)) {
    throw DivergentIntegralError("quadrature produced a non-finite value");
  }
  if (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    std::ostringstream os;
    os << "quadrature tolerance not reached on [" << a << ", " << b
       << "]: error estimate " << err;
    throw QuadratureError(os.str());
  }
  if (error_estimate) *error_estimate = err;
  return total;
}

namespace {

struct DensityIntegration {
  const JumpMeasure& nu;
  const JumpIntegrand& g;
  const JumpDensity& shape;
  TailGrowth growth_y;

  // Integrand in base coordinates, without the density factor.
  double core(double y) const {
    double weight = 1.0;
    if (nu.tilt()) weight = nu.tilt()->value(y);
    double mark = y;
    if (nu.log_map()) mark = nu.log_map()->log_value(y);
    return g(std::span<const double>(&mark, 1)) * weight;
  }

  double full(double y) const {
    const double lv = shape.log_value(y);
    if (lv == -kInf) return 0.0;
    const double v = core(y) * std::exp(lv);
    if (!std::isfinite(v)) {
      throw DivergentIntegralError("jump integrand is not finite at y = " +
                                   std::to_string(y));
    }
    return v;
  }
};

// Breakpoints of h(log Y(y)) = log Y(y) 1{|log Y(y)| <= 1}: preimages of +-1.
std::vector<double> log_map_knots(const JumpRatio& ratio) {
  std::vector<double> knots;
  const double beta = ratio.beta()[0];
  if (beta == 0.0) return knots;
  const auto& spec = ratio.spec();
  for (double z : {-1.0, 1.0}) {
    const double w = spec.fprime(std::exp(z)) - spec.fprime_at_1();
    const double arg = w / beta;
    if (arg > -1.0) knots.push_back(std::log1p(arg));
  }
  return knots;
}

}  // namespace

bool jumps_integrable(const JumpMeasure& nu, const TailGrowth& growth) {
  if (nu.kind() != JumpMeasure::Kind::Density) return true;
  const auto& shape = nu.density_shape();
  try {
    TailGrowth gy = nu.log_map() ? nu.log_map()->compose(growth) : growth;
    if (nu.tilt()) {
      if (!nu.tilt()->defined_on(shape.lower(), shape.upper())) return false;
      gy = gy + nu.tilt()->growth();
    }
    if (nu.log_map() && !nu.log_map()->defined_on(shape.lower(), shape.upper())) {
      return false;
    }
    if (shape.lower() < -1.0 && !shape.tail_integrable(Side::Lower, gy.lower)) return false;
    if (shape.upper() > 1.0 && !shape.tail_integrable(Side::Upper, gy.upper)) return false;
  } catch (const DivergentIntegralError&) {
    return false;
  } catch (const YUndefinedError&) {
    return false;
  }
  return true;
}

double integrate_jumps(const JumpMeasure& nu, const JumpIntegrand& g,
                       const TailGrowth& growth, const QuadratureOptions& opts) {
  switch (nu.kind()) {
    case JumpMeasure::Kind::None:
      return 0.0;
    case JumpMeasure::Kind::Atoms: {
      double total = 0.0;
      for (const auto& atom : nu.atom_list()) {
        const double v = g(std::span<const double>(atom.location.data(),
                                                   atom.location.size()));
        total += atom.weight * v;
      }
      if (!std::isfinite(total)) {
        throw DivergentIntegralError("jump sum over atoms is not finite");
      }
      return total;
    }
    case JumpMeasure::Kind::Density:
      break;
  }

  const auto& shape = nu.density_shape();
  const double lower = shape.lower();
  const double upper = shape.upper();
  TailGrowth gy = nu.log_map() ? nu.log_map()->compose(growth) : growth;
  if (nu.tilt()) {
    if (!nu.tilt()->defined_on(lower, upper)) {
      throw YUndefinedError("Y is not positive on the whole support of nu",
                            upper);
    }
    gy = gy + nu.tilt()->growth();
  }
  if (nu.log_map() && !nu.log_map()->defined_on(lower, upper)) {
    throw YUndefinedError("log Y is not defined on the whole support of nu", upper);
  }
  for (Side side : {Side::Lower, Side::Upper}) {
    const bool extends = side == Side::Lower ? lower < -1.0 : upper > 1.0;
    if (extends && !shape.tail_integrable(side, gy.at(side))) {
      throw DivergentIntegralError(
          std::string("jump integral diverges on the ") +
          (side == Side::Lower ? "lower" : "upper") + " tail");
    }
  }

  DensityIntegration job{nu, g, shape, gy};
  const double eps = nu.inner_cutoff();
  const auto singular = shape.singularity_index();

  std::vector<double> extra_knots;
  if (nu.log_map()) extra_knots = log_map_knots(*nu.log_map());

  double total = 0.0;
  for (Side side : {Side::Lower, Side::Upper}) {
    const double sign = side == Side::Lower ? -1.0 : 1.0;
    const double reach = side == Side::Lower ? -lower : upper;  // |y| extent
    if (!(reach > eps)) continue;
    const double far = std::min(reach, shape.tail_cutoff(side, gy.at(side)));

    std::vector<double> knots{std::min(1.0, far)};
    for (double k : extra_knots) {
      const double ak = sign * k;
      if (ak > eps && ak < far) knots.push_back(ak);
    }
    if (far > 1.0) knots.push_back(far);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    // Piece adjacent to the origin.
    const double first = knots.front();
    if (singular) {
      const double t_max = eps > 0.0 ? std::log(first / eps) : singular_t_max(*singular);
      auto f = [&](double t) {
        const double ay = first * std::exp(-t);
        const double y = sign * ay;
        const double lv = shape.log_value(y);
        if (lv == -kInf) return 0.0;
        const double v = job.core(y) * std::exp(lv + std::log(ay));
        if (!std::isfinite(v)) {
          throw DivergentIntegralError("jump integrand is not finite near the origin");
        }
        return v;
      };
      // Chunks keep the exponentially decaying integrand well resolved.
      const int chunks = std::max(1, static_cast<int>(std::ceil(t_max / 4.0)));
      for (int c = 0; c < chunks; ++c) {
        total += integrate_interval(f, t_max * c / chunks, t_max * (c + 1) / chunks, opts);
      }
    } else {
      auto f = [&](double ay) { return job.full(sign * ay); };
      total += integrate_interval(f, eps, first, opts);
    }

    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double a = knots[k];
      const double b = knots[k + 1];
      const int chunks = b - a > 1.0 ? 8 : 1;
      auto f = [&](double ay) { return job.full(sign * ay); };
      for (int c = 0; c < chunks; ++c) {
        total += integrate_interval(f, a + (b - a) * c / chunks,
                                    a + (b - a) * (c + 1) / chunks, opts);
      }
    }
  }
  return total;
}

}  // namespace levyopt
