#include <levyopt/levyopt.h>

#include <cstring>
#include <map>
#include <memory>
#include <string>

#include "app/run.hpp"
#include "core/errors.hpp"
#include "strategy/strategy_engine.hpp"

using namespace levyopt;

struct lvo_model {
  ModelConfig config;
};

struct lvo_divergence {
  DivergenceSpec spec;
};

struct lvo_measure {
  MarketModel model;
  LevyTriplet triplet;
  DivergenceSpec spec;
  GirsanovPair pair;
};

struct lvo_strategy {
  StrategySolution sol;
};

struct lvo_run_config {
  std::map<std::string, std::string> keys;
  std::string output;
};

namespace {

thread_local std::string g_last_error;
thread_local lvo_solver_failure g_last_failure = LVO_SOLVER_NONE;

lvo_status fail(lvo_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

lvo_status fail_current() {
  g_last_failure = LVO_SOLVER_NONE;
  try {
    throw;
  } catch (const ConfigError& e) {
    return fail(LVO_ERR_CONFIG, e.what());
  } catch (const SolverError& e) {
    switch (e.kind()) {
      case SolverFailure::NoSolution: g_last_failure = LVO_SOLVER_NO_SOLUTION; break;
      case SolverFailure::Positivity: g_last_failure = LVO_SOLVER_POSITIVITY; break;
      case SolverFailure::Integrability: g_last_failure = LVO_SOLVER_INTEGRABILITY; break;
    }
    return fail(LVO_ERR_SOLVER, e.what());
  } catch (const DivergentIntegralError& e) {
    return fail(LVO_ERR_DIVERGENT, e.what());
  } catch (const QuadratureError& e) {
    return fail(LVO_ERR_SOLVER, e.what());
  } catch (const VerificationError& e) {
    return fail(LVO_ERR_VERIFICATION, e.what());
  } catch (const DomainError& e) {
    return fail(LVO_ERR_DOMAIN, e.what());
  } catch (const YUndefinedError& e) {
    return fail(LVO_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LVO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LVO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LVO_ERR_INTERNAL, "unknown error");
  }
}

template <class F>
lvo_status guarded(F&& f) {
  try {
    g_last_error.clear();
    g_last_failure = LVO_SOLVER_NONE;
    f();
    return LVO_OK;
  } catch (...) {
    return fail_current();
  }
}

lvo_status copy_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap < s.size() + 1) {
    if (!buf && cap == 0) return LVO_ERR_BUFFER_TOO_SMALL;
    return fail(LVO_ERR_BUFFER_TOO_SMALL, "buffer too small");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return LVO_OK;
}

lvo_status copy_vector(const Vector& v, double* out, size_t cap, size_t* dim) {
  if (dim) *dim = static_cast<size_t>(v.size());
  if (!out || cap < static_cast<size_t>(v.size())) {
    return fail(LVO_ERR_BUFFER_TOO_SMALL, "buffer too small");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
  return LVO_OK;
}

#define LVO_REQUIRE(cond, msg) \
  do {                         \
    if (!(cond)) return fail(LVO_ERR_INVALID_ARGUMENT, msg); \
  } while (0)

}  // namespace

extern "C" {

const char* lvo_version(void) { return kLevyoptVersion; }

const char* lvo_status_name(lvo_status status) {
  switch (status) {
    case LVO_OK: return "ok";
    case LVO_ERR_INTERNAL: return "internal error";
    case LVO_ERR_CONFIG: return "config error";
    case LVO_ERR_SOLVER: return "solver failure";
    case LVO_ERR_VERIFICATION: return "verification failure";
    case LVO_ERR_DOMAIN: return "domain error";
    case LVO_ERR_DIVERGENT: return "divergent integral";
    case LVO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LVO_ERR_BUFFER_TOO_SMALL: return "buffer too small";
  }
  return "unknown status";
}

const char* lvo_last_error(void) { return g_last_error.c_str(); }

lvo_solver_failure lvo_last_solver_failure(void) { return g_last_failure; }

lvo_status lvo_model_load(const char* path_or_name, lvo_model** out) {
  LVO_REQUIRE(path_or_name && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new lvo_model{load_model_config(path_or_name)}; });
}

lvo_status lvo_model_from_string(const char* ini_text, lvo_model** out) {
  LVO_REQUIRE(ini_text && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new lvo_model{parse_model_config(ini_text, "<string>")}; });
}

void lvo_model_free(lvo_model* model) { delete model; }

int lvo_model_dim(const lvo_model* model) { return model ? model->config.model.triplet.dim : 0; }

lvo_status lvo_model_validate(const lvo_model* model) {
  LVO_REQUIRE(model, "null model");
  return guarded([&] {
    const auto problems = validate_model(model->config.model);
    if (problems.empty()) return;
    std::string msg;
    for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "\n" : "") + problems[k];
    throw ConfigError(msg);
  });
}

lvo_status lvo_builtin_models(char* buf, size_t cap, size_t* needed) {
  std::string s;
  for (const auto& n : builtin_model_names()) s += n + "\n";
  return copy_string(s, buf, cap, needed);
}

lvo_status lvo_divergence_parse(const char* text, lvo_divergence** out) {
  LVO_REQUIRE(text && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    try {
      *out = new lvo_divergence{DivergenceSpec::parse(text)};
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  });
}

void lvo_divergence_free(lvo_divergence* div) { delete div; }

lvo_status lvo_divergence_params(const lvo_divergence* div, double params[4]) {
  LVO_REQUIRE(div && params, "null argument");
  params[0] = div->spec.a();
  params[1] = div->spec.gamma();
  params[2] = div->spec.fprime_at_1();
  params[3] = div->spec.f_at_1();
  return LVO_OK;
}

lvo_status lvo_divergence_fprime(const lvo_divergence* div, double x, double* out) {
  LVO_REQUIRE(div && out, "null argument");
  return guarded([&] { *out = div->spec.fprime(x); });
}

lvo_status lvo_divergence_utility(const lvo_divergence* div, double x, double* out) {
  LVO_REQUIRE(div && out, "null argument");
  return guarded([&] { *out = div->spec.utility(x); });
}

lvo_status lvo_measure_solve(const lvo_model* model, const lvo_divergence* div, double tol,
                             lvo_measure** out) {
  LVO_REQUIRE(model && div && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto& m = model->config.model;
    const auto problems = validate_model(m);
    if (!problems.empty()) {
      std::string msg;
      for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
      throw ConfigError(msg);
    }
    SolverOptions opts;
    if (tol > 0.0) opts.tol = tol;
    auto tr = discounted_triplet(m);
    auto pair = solve_beta(tr, div->spec, opts);
    *out = new lvo_measure{m, std::move(tr), div->spec, std::move(pair)};
  });
}

void lvo_measure_free(lvo_measure* measure) { delete measure; }

lvo_status lvo_measure_beta(const lvo_measure* measure, double* beta, size_t cap, size_t* dim) {
  LVO_REQUIRE(measure, "null measure");
  return copy_vector(measure->pair.beta, beta, cap, dim);
}

lvo_status lvo_measure_residual(const lvo_measure* measure, double* out) {
  LVO_REQUIRE(measure && out, "null argument");
  *out = measure->pair.residual_norm;
  return LVO_OK;
}

int lvo_measure_conditions_passed(const lvo_measure* measure) {
  return measure && measure->pair.conditions.all_passed() ? 1 : 0;
}

lvo_status lvo_measure_hellinger(const lvo_measure* measure, double* out) {
  LVO_REQUIRE(measure && out, "null argument");
  return guarded([&] {
    *out = hellinger_half(measure->triplet, measure->pair, measure->model.horizon).value;
  });
}

lvo_status lvo_measure_kappa_q(const lvo_measure* measure, double theta, double* out) {
  LVO_REQUIRE(measure && out, "null argument");
  return guarded([&] {
    const DensityMomentCurve curve(measure->triplet, measure->pair.ratio, MeasureTag::Q);
    *out = curve.kappa(theta);
  });
}

lvo_status lvo_measure_ratio(const lvo_measure* measure, const double* y, double* out) {
  LVO_REQUIRE(measure && y && out, "null argument");
  return guarded([&] {
    *out = measure->pair.ratio.value(
        std::span<const double>(y, static_cast<std::size_t>(measure->triplet.dim)));
  });
}

lvo_status lvo_strategy_make(const lvo_measure* measure, double capital, lvo_strategy** out) {
  LVO_REQUIRE(measure && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new lvo_strategy{make_strategy(measure->triplet, measure->spec, measure->pair, capital,
                                          measure->model.horizon)};
  });
}

void lvo_strategy_free(lvo_strategy* strategy) { delete strategy; }

lvo_status lvo_strategy_lambda(const lvo_strategy* strategy, double* out) {
  LVO_REQUIRE(strategy && out, "null argument");
  *out = strategy->sol.lambda;
  return LVO_OK;
}

int lvo_strategy_pure_jump(const lvo_strategy* strategy) {
  return strategy && strategy->sol.branch == StrategyBranch::PureJump ? 1 : 0;
}

lvo_status lvo_strategy_coef(const lvo_strategy* strategy, double* coef, size_t cap,
                             size_t* dim) {
  LVO_REQUIRE(strategy, "null strategy");
  return copy_vector(strategy->sol.coef, coef, cap, dim);
}

lvo_status lvo_strategy_shares(const lvo_strategy* strategy, double t, double z_minus,
                               const double* s_minus, double* shares) {
  LVO_REQUIRE(strategy && s_minus && shares, "null argument");
  return guarded([&] {
    const int d = strategy->sol.triplet.dim;
    Vector s(d);
    for (int i = 0; i < d; ++i) s[i] = s_minus[i];
    const Vector phi = strategy_at(strategy->sol, t, z_minus, s);
    for (int i = 0; i < d; ++i) shares[i] = phi[i];
  });
}

lvo_status lvo_strategy_rho(const lvo_strategy* strategy, double t, double z, double* out) {
  LVO_REQUIRE(strategy && out, "null argument");
  return guarded([&] { *out = solution_rho(strategy->sol, t, z); });
}

lvo_status lvo_run_config_new(lvo_run_config** out) {
  LVO_REQUIRE(out, "null argument");
  *out = new (std::nothrow) lvo_run_config{};
  return *out ? LVO_OK : fail(LVO_ERR_INTERNAL, "out of memory");
}

void lvo_run_config_free(lvo_run_config* cfg) { delete cfg; }

lvo_status lvo_run_config_set(lvo_run_config* cfg, const char* key, const char* value) {
  LVO_REQUIRE(cfg && key && value, "null argument");
  return guarded([&] { cfg->keys[key] = value; });
}

lvo_status lvo_run(const char* command, lvo_run_config* cfg) {
  LVO_REQUIRE(command && cfg, "null argument");
  cfg->output.clear();
  lvo_status st = LVO_OK;
  const lvo_status caught = guarded([&] {
    const auto resolved = resolve_run_config(cfg->keys);
    const auto result = run_command(command, resolved);
    cfg->output = result.text;
    if (result.status == 4) {
      st = fail(LVO_ERR_VERIFICATION, "verification assertions failed");
    } else if (result.status == 3) {
      st = fail(LVO_ERR_SOLVER, "solver conditions not satisfied");
    }
  });
  return caught != LVO_OK ? caught : st;
}

lvo_status lvo_run_output(const lvo_run_config* cfg, char* buf, size_t cap, size_t* needed) {
  LVO_REQUIRE(cfg, "null config");
  return copy_string(cfg->output, buf, cap, needed);
}

}  // extern "C"
