#include "app/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <variant>

#include "core/errors.hpp"

namespace levyopt {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-') throw ConfigError(key + ": expected an unsigned integer");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::string t = text;
  for (char& ch : t) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream is(t);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(to_double(key, tok));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const double* v, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += fmt(v[i]);
  }
  return s;
}

class Section {
 public:
  Section(const pt::ptree& root, const std::string& name) : name_(name) {
    if (auto child = root.get_child_optional(name)) tree_ = *child;
  }
  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }
  std::string text(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ConfigError("[" + name_ + "] " + key + ": missing");
    return trim(*v);
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }
  double number(const std::string& key) const { return to_double(name_ + "." + key, text(key)); }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::vector<double> list(const std::string& key) const {
    return to_list(name_ + "." + key, text(key));
  }
  const pt::ptree& tree() const { return tree_; }

 private:
  std::string name_;
  pt::ptree tree_;
};

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

JumpMeasure parse_jumps(const Section& s, int dim) {
  const std::string kind = s.text("kind", "none");
  if (kind == "none") return JumpMeasure::none(dim);
  if (kind == "atoms") {
    std::vector<std::string> locs;
    std::istringstream is(s.text("locations"));
    std::string part;
    while (std::getline(is, part, ';')) {
      if (!trim(part).empty()) locs.push_back(part);
    }
    const auto weights = s.list("weights");
    if (weights.size() != locs.size()) {
      throw ConfigError("[jumps] atoms: " + std::to_string(locs.size()) + " locations but " +
                        std::to_string(weights.size()) + " weights");
    }
    std::vector<Atom> atoms;
    for (std::size_t k = 0; k < locs.size(); ++k) {
      const auto y = to_list("jumps.locations", locs[k]);
      if (static_cast<int>(y.size()) != dim) {
        throw ConfigError("[jumps] atom " + std::to_string(k) + " has wrong dimension");
      }
      atoms.push_back({to_vector(y), weights[k]});
    }
    return JumpMeasure::atoms(std::move(atoms));
  }
  if (kind == "gaussian") {
    return JumpMeasure::density(JumpDensity(
        GaussianJumps{s.number("intensity"), s.number("mean"), s.number("stddev")}));
  }
  if (kind == "double_exponential") {
    return JumpMeasure::density(JumpDensity(DoubleExponentialJumps{
        s.number("intensity"), s.number("p_up"), s.number("eta_up"), s.number("eta_down")}));
  }
  if (kind == "tempered_stable") {
    return JumpMeasure::density(JumpDensity(
        TemperedStableJumps{s.number("c"), s.number("g"), s.number("m"), s.number("index")}));
  }
  if (kind == "power_law") {
    return JumpMeasure::density(JumpDensity(
        PowerLawJumps{s.number("scale"), s.number("exponent"), s.number("bound")}));
  }
  throw ConfigError("[jumps] kind: unknown '" + kind + "'");
}

const char* kBlackScholes = R"([model]
name = black_scholes
dim = 1
drift = 0.05
gauss_c = 0.04
spot = 1
rate = 0
horizon = 1

[jumps]
kind = none

[divergence]
preset = log

[run]
capital = 1
grid = 100
)";

const char* kMertonJump = R"([model]
name = merton_jump
dim = 1
drift = 0.01
gauss_c = 0.04
spot = 1
rate = 0
horizon = 1

[jumps]
kind = gaussian
intensity = 1
mean = -0.05
stddev = 0.1

[divergence]
preset = exponential

[run]
capital = 1
grid = 100
)";

const char* kKou = R"([model]
name = kou_double_exp
dim = 1
drift = 0.01
gauss_c = 0.04
spot = 1
rate = 0
horizon = 1

[jumps]
kind = double_exponential
intensity = 1
p_up = 0.4
eta_up = 10
eta_down = 8

[divergence]
preset = log

[run]
capital = 1
grid = 100
)";

const char* kSingleAtom = R"([model]
name = single_atom_pure_jump
dim = 1
drift = 0.05
gauss_c = 0
spot = 1
rate = 0
horizon = 1

[jumps]
kind = atoms
locations = -0.2
weights = 1

[divergence]
preset = power:0.5

[run]
capital = 1
grid = 100
)";

const char* kTemperedStable = R"([model]
name = tempered_stable
dim = 1
drift = 0.02
gauss_c = 0.01
spot = 1
rate = 0
horizon = 1

[jumps]
kind = tempered_stable
c = 0.5
g = 5
m = 6
index = 0.8

[simulation]
epsilon = 0.001
gaussian_correction = true

[divergence]
preset = log

[run]
capital = 1
grid = 100
)";

// Upward atom with a large drift: the root needs Y <= 0 at the atom.
const char* kCdsec1 = R"([model]
name = cdsec1_violation
dim = 1
drift = 0.5
gauss_c = 0
spot = 1
rate = 0
horizon = 1

[jumps]
kind = atoms
locations = 0.3
weights = 1

[divergence]
preset = log
)";

// Negative drift forces beta > 0; under the exponential preset Y grows like
// exp(beta e^y) and the upper tail integral diverges.
const char* kCdsec2 = R"([model]
name = cdsec2_divergent
dim = 1
drift = -0.2
gauss_c = 0.04
spot = 1
rate = 0
horizon = 1

[jumps]
kind = gaussian
intensity = 1
mean = -0.05
stddev = 0.1

[divergence]
preset = exponential
)";

const std::map<std::string, const char*>& builtins() {
  static const std::map<std::string, const char*> table{
      {"black_scholes", kBlackScholes},
      {"merton_jump", kMertonJump},
      {"kou_double_exp", kKou},
      {"single_atom_pure_jump", kSingleAtom},
      {"single_atom", kSingleAtom},
      {"tempered_stable", kTemperedStable},
      {"cdsec1_violation", kCdsec1},
      {"cdsec2_divergent", kCdsec2},
  };
  return table;
}

}  // namespace

std::vector<std::string> builtin_model_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtins()) names.push_back(k);
  return names;
}

std::vector<std::string> bundled_model_names() {
  return {"black_scholes", "merton_jump", "kou_double_exp", "single_atom_pure_jump"};
}

bool is_builtin_model(const std::string& name) { return builtins().count(name) > 0; }

ModelConfig builtin_model(const std::string& name) {
  const auto it = builtins().find(name);
  if (it == builtins().end()) throw ConfigError("unknown built-in model '" + name + "'");
  return parse_model_config(it->second, name);
}

ModelConfig parse_model_config(const std::string& text, const std::string& source) {
  pt::ptree root;
  try {
    std::istringstream is(text);
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [key, child] : root) {
    if (key != "model" && key != "jumps" && key != "simulation" && key != "divergence" &&
        key != "run") {
      throw ConfigError(source + ": unknown section [" + key + "]");
    }
    (void)child;
  }
  ModelConfig cfg;
  cfg.source = source;
  const Section m(root, "model");
  auto& model = cfg.model;
  model.name = m.text("name", source);
  const double dim_d = m.number("dim", 1.0);
  if (!(dim_d >= 1.0) || dim_d != std::floor(dim_d) || dim_d > 64) {
    throw ConfigError("[model] dim must be a positive integer");
  }
  const int dim = static_cast<int>(dim_d);
  auto& tr = model.triplet;
  tr.dim = dim;
  const auto drift = m.list("drift");
  if (static_cast<int>(drift.size()) != dim) throw ConfigError("[model] drift needs dim entries");
  tr.drift = to_vector(drift);
  const auto c = m.has("gauss_c") ? m.list("gauss_c") : std::vector<double>(dim * dim, 0.0);
  if (static_cast<int>(c.size()) != dim * dim) {
    throw ConfigError("[model] gauss_c needs dim*dim entries (row-major)");
  }
  tr.gauss = Matrix(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) tr.gauss(i, j) = c[i * dim + j];
  }
  const auto spot = m.has("spot") ? m.list("spot") : std::vector<double>(dim, 1.0);
  if (static_cast<int>(spot.size()) != dim) throw ConfigError("[model] spot needs dim entries");
  model.spot = to_vector(spot);
  model.rate = m.number("rate", 0.0);
  model.horizon = m.number("horizon", 1.0);

  try {
    tr.jumps = parse_jumps(Section(root, "jumps"), dim);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("[jumps] ") + e.what());
  }

  const Section sim(root, "simulation");
  model.sim.epsilon = sim.number("epsilon", model.sim.epsilon);
  if (sim.has("gaussian_correction")) {
    const std::string g = sim.text("gaussian_correction");
    if (g == "true" || g == "1" || g == "yes") {
      model.sim.gaussian_correction = true;
    } else if (g == "false" || g == "0" || g == "no") {
      model.sim.gaussian_correction = false;
    } else {
      throw ConfigError("[simulation] gaussian_correction must be true or false");
    }
  }

  const Section div(root, "divergence");
  if (div.has("preset")) {
    cfg.defaults["divergence"] = div.text("preset");
  } else if (div.has("a") || div.has("gamma")) {
    cfg.defaults["divergence"] = "custom:" + div.text("a") + "," + div.text("gamma") + "," +
                                 div.text("fprime1") + "," + div.text("f1");
  }
  const Section run(root, "run");
  for (const auto& [key, value] : run.tree()) {
    cfg.defaults[key] = trim(value.data());
  }
  return cfg;
}

ModelConfig load_model_config(const std::string& path_or_name) {
  std::ifstream in(path_or_name);
  if (!in) {
    if (is_builtin_model(path_or_name)) return builtin_model(path_or_name);
    throw ConfigError("model '" + path_or_name + "' is neither a readable file nor a built-in");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str(), path_or_name);
}

std::string format_model_config(const MarketModel& model) {
  const auto& tr = model.triplet;
  std::ostringstream os;
  os << "[model]\nname = " << model.name << "\ndim = " << tr.dim
     << "\ndrift = " << fmt_list(tr.drift.data(), tr.drift.size());
  Matrix c = tr.gauss.transpose();  // column-major storage, row-major text
  os << "\ngauss_c = " << fmt_list(c.data(), c.size())
     << "\nspot = " << fmt_list(model.spot.data(), model.spot.size())
     << "\nrate = " << fmt(model.rate) << "\nhorizon = " << fmt(model.horizon) << "\n\n[jumps]\n";
  const auto& nu = tr.jumps;
  switch (nu.kind()) {
    case JumpMeasure::Kind::None:
      os << "kind = none\n";
      break;
    case JumpMeasure::Kind::Atoms: {
      os << "kind = atoms\nlocations = ";
      std::string w;
      for (std::size_t k = 0; k < nu.atom_list().size(); ++k) {
        const auto& a = nu.atom_list()[k];
        if (k) {
          os << "; ";
          w += ' ';
        }
        os << fmt_list(a.location.data(), a.location.size());
        w += fmt(a.weight);
      }
      os << "\nweights = " << w << "\n";
      break;
    }
    case JumpMeasure::Kind::Density:
      std::visit(
          [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, GaussianJumps>) {
              os << "kind = gaussian\nintensity = " << fmt(s.intensity) << "\nmean = "
                 << fmt(s.mean) << "\nstddev = " << fmt(s.stddev) << "\n";
            } else if constexpr (std::is_same_v<S, DoubleExponentialJumps>) {
              os << "kind = double_exponential\nintensity = " << fmt(s.intensity)
                 << "\np_up = " << fmt(s.p_up) << "\neta_up = " << fmt(s.eta_up)
                 << "\neta_down = " << fmt(s.eta_down) << "\n";
            } else if constexpr (std::is_same_v<S, TemperedStableJumps>) {
              os << "kind = tempered_stable\nc = " << fmt(s.c) << "\ng = " << fmt(s.g)
                 << "\nm = " << fmt(s.m) << "\nindex = " << fmt(s.index) << "\n";
            } else {
              os << "kind = power_law\nscale = " << fmt(s.scale) << "\nexponent = "
                 << fmt(s.exponent) << "\nbound = " << fmt(s.bound) << "\n";
            }
          },
          nu.density_shape().shape());
      break;
  }
  os << "\n[simulation]\nepsilon = " << fmt(model.sim.epsilon)
     << "\ngaussian_correction = " << (model.sim.gaussian_correction ? "true" : "false") << "\n";
  return os.str();
}

RunConfig resolve_run_config(const std::map<std::string, std::string>& keys) {
  static const char* known[] = {"model", "divergence", "capital", "paths", "grid",
                                "seed",  "tol",        "out",     "suite", "measure"};
  for (const auto& [k, v] : keys) {
    if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
      throw ConfigError("unknown run option '" + k + "'");
    }
    (void)v;
  }
  RunConfig cfg;
  cfg.raw = keys;
  std::map<std::string, std::string> merged;
  if (auto it = keys.find("model"); it != keys.end()) {
    cfg.model = load_model_config(it->second);
    merged = cfg.model.defaults;
  } else {
    cfg.verify_models = bundled_model_names();
    cfg.model = builtin_model(cfg.verify_models.front());
  }
  for (const auto& [k, v] : keys) merged[k] = v;

  for (const auto& [k, v] : merged) {
    if (k == "divergence") {
      try {
        cfg.divergence = DivergenceSpec::parse(v);
      } catch (const Error& e) {
        throw ConfigError(std::string("divergence: ") + e.what());
      }
      cfg.divergence_text = v;
    } else if (k == "capital") {
      cfg.capital = to_double(k, v);
    } else if (k == "paths") {
      cfg.paths = to_u64(k, v);
      if (*cfg.paths == 0) throw ConfigError("paths must be positive");
    } else if (k == "grid") {
      const auto g = to_u64(k, v);
      if (g == 0 || g > 1000000) throw ConfigError("grid must be a positive step count");
      cfg.grid = static_cast<int>(g);
    } else if (k == "seed") {
      cfg.seed = to_u64(k, v);
    } else if (k == "tol") {
      cfg.tol = to_double(k, v);
      if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    } else if (k == "out") {
      cfg.out_dir = v;
    } else if (k == "suite") {
      cfg.suite = v;
    } else if (k == "measure") {
      if (v == "P" || v == "p") {
        cfg.measure = MeasureTag::P;
      } else if (v == "Q" || v == "q") {
        cfg.measure = MeasureTag::Q;
      } else {
        throw ConfigError("measure must be P or Q");
      }
    } else if (k != "model") {
      throw ConfigError("unknown [run] key '" + k + "'");
    }
  }
  if (keys.find("out") == keys.end()) {
    if (const char* env = std::getenv("LEVYOPT_OUT_DIR"); env && *env) cfg.out_dir = env;
  }
  return cfg;
}

}  // namespace levyopt
