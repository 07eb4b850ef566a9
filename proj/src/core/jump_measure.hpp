#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "core/jump_density.hpp"
#include "core/jump_ratio.hpp"

namespace levyopt {

struct Atom {
  Vector location;
  double weight;
};

/// Hull of the support plus whether its interior is a neighbourhood of 0.
struct SupportDescriptor {
  Vector lower;
  Vector upper;
  bool interior_contains_zero = false;
};

/// Levy measure nu on R^d \ {0}: nothing, a finite list of atoms, or a
/// one-dimensional density.
///
/// Densities can carry two lazy transforms built from a JumpRatio Y:
/// a tilt (nu -> Y nu, the jump measure under Q*) and a log map (marks
/// y -> log Y(y), the jump measure of log Z). Atoms are transformed eagerly.
class JumpMeasure {
 public:
  enum class Kind { None, Atoms, Density };

  static JumpMeasure none(int dim);
  static JumpMeasure atoms(std::vector<Atom> atoms);
  static JumpMeasure density(JumpDensity density);

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  bool empty() const noexcept { return kind_ == Kind::None; }

  const std::vector<Atom>& atom_list() const noexcept { return atoms_; }
  const JumpDensity& density_shape() const;
  const std::optional<JumpRatio>& tilt() const noexcept { return tilt_; }
  const std::optional<JumpRatio>& log_map() const noexcept { return log_map_; }
  /// Jumps with |y| <= inner_cutoff have been removed.
  double inner_cutoff() const noexcept { return inner_cutoff_; }

  JumpMeasure tilted(const JumpRatio& ratio) const;
  JumpMeasure log_pushforward(const JumpRatio& ratio) const;
  JumpMeasure truncated(double epsilon) const;

  bool finite_activity() const;
  /// In the base (un-mapped) coordinates.
  SupportDescriptor support() const;

 private:
  Kind kind_ = Kind::None;
  int dim_ = 1;
  std::vector<Atom> atoms_;
  std::shared_ptr<const JumpDensity> density_;
  std::optional<JumpRatio> tilt_;
  std::optional<JumpRatio> log_map_;
  double inner_cutoff_ = 0.0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  /// At most 2^max_depth (capped at 2^14) subintervals per call.
  unsigned max_depth = 12;
};

using JumpIntegrand = std::function<double(std::span<const double>)>;

/// int g(y) nu(dy), where `growth` bounds |g| on each tail (in the mark
/// coordinates of nu, i.e. log-space for a log-mapped measure).
///
/// Throws DivergentIntegralError when a tail test fails and QuadratureError
/// when the adaptive Gauss-Kronrod estimate misses the tolerance. Errors
/// thrown by g (YUndefinedError in particular) propagate.
double integrate_jumps(const JumpMeasure& nu, const JumpIntegrand& g,
                       const TailGrowth& growth = TailGrowth::bounded(),
                       const QuadratureOptions& opts = {});

/// Same tail test, without integrating.
bool jumps_integrable(const JumpMeasure& nu, const TailGrowth& growth);

/// Globally adaptive 15/31-point Gauss-Kronrod on [a, b].
double integrate_interval(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& opts = {},
                          double* error_estimate = nullptr);

}  // namespace levyopt
