#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/divergence.hpp"
#include "core/levy_core.hpp"
#include "density/density_engine.hpp"

namespace levyopt {

/// A model as read from a config file or picked from the built-ins, with the
/// run defaults the file may carry.
struct ModelConfig {
  MarketModel model;
  std::string source;  // built-in name or file path
  std::map<std::string, std::string> defaults;  // [divergence] / [run] keys
};

std::vector<std::string> builtin_model_names();
/// Models shipped for `verify run` when no model is given.
std::vector<std::string> bundled_model_names();
bool is_builtin_model(const std::string& name);
ModelConfig builtin_model(const std::string& name);

/// INI text:
///   [model]      name, dim, drift, gauss_c (row-major), spot, rate, horizon
///   [jumps]      kind = none | atoms | gaussian | double_exponential |
///                tempered_stable | power_law, plus that kind's parameters
///   [simulation] epsilon, gaussian_correction
///   [divergence] preset, or a, gamma, fprime1, f1
///   [run]        capital, paths, grid, seed, tol
ModelConfig parse_model_config(const std::string& text, const std::string& source);
ModelConfig load_model_config(const std::string& path_or_name);
/// Serialises a model (no run defaults) in the same format.
std::string format_model_config(const MarketModel& model);

struct RunConfig {
  ModelConfig model;
  DivergenceSpec divergence = DivergenceSpec::log();
  std::string divergence_text = "log";
  double capital = 1.0;
  std::optional<std::uint64_t> paths;
  int grid = 100;
  std::uint64_t seed = 20240611;
  double tol = 1e-10;
  std::string out_dir = "levyopt_out";
  std::string suite = "all";
  MeasureTag measure = MeasureTag::Q;
  std::vector<std::string> verify_models;  // filled when --model is absent
  std::map<std::string, std::string> raw;   // everything as given
};

/// Keys: model, divergence, capital, paths, grid, seed, tol, out, suite,
/// measure. File defaults apply first, then the explicit keys. `out` falls
/// back to LEVYOPT_OUT_DIR.
RunConfig resolve_run_config(const std::map<std::string, std::string>& keys);

}  // namespace levyopt
