#ifndef LEVYOPT_LEVYOPT_H
#define LEVYOPT_LEVYOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define LVO_API __declspec(dllexport)
#else
#  define LVO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The nonzero values used by the CLI as exit codes are 2, 3, 4. */
typedef enum lvo_status {
  LVO_OK = 0,
  LVO_ERR_INTERNAL = 1,
  LVO_ERR_CONFIG = 2,
  LVO_ERR_SOLVER = 3,
  LVO_ERR_VERIFICATION = 4,
  LVO_ERR_DOMAIN = 5,
  LVO_ERR_DIVERGENT = 6,
  LVO_ERR_INVALID_ARGUMENT = 7,
  LVO_ERR_BUFFER_TOO_SMALL = 8
} lvo_status;

/* Failure kinds carried by LVO_ERR_SOLVER. */
typedef enum lvo_solver_failure {
  LVO_SOLVER_NONE = 0,
  LVO_SOLVER_NO_SOLUTION = 1,
  LVO_SOLVER_POSITIVITY = 2,
  LVO_SOLVER_INTEGRABILITY = 3
} lvo_solver_failure;

typedef struct lvo_model lvo_model;
typedef struct lvo_divergence lvo_divergence;
typedef struct lvo_measure lvo_measure;
typedef struct lvo_strategy lvo_strategy;
typedef struct lvo_run_config lvo_run_config;

LVO_API const char* lvo_version(void);
LVO_API const char* lvo_status_name(lvo_status status);

/* Message of the last failing call on this thread ("" if none). */
LVO_API const char* lvo_last_error(void);
/* Solver failure kind of the last failing call on this thread. */
LVO_API lvo_solver_failure lvo_last_solver_failure(void);

/* Models: a built-in name or an INI file path. */
LVO_API lvo_status lvo_model_load(const char* path_or_name, lvo_model** out);
LVO_API lvo_status lvo_model_from_string(const char* ini_text, lvo_model** out);
LVO_API void lvo_model_free(lvo_model* model);
LVO_API int lvo_model_dim(const lvo_model* model);
/* LVO_ERR_CONFIG with every violated invariant in lvo_last_error(). */
LVO_API lvo_status lvo_model_validate(const lvo_model* model);
/* Newline-separated built-in model names. String outputs follow one
 * pattern: *needed receives the length including the terminator and
 * LVO_ERR_BUFFER_TOO_SMALL is returned when cap is short. */
LVO_API lvo_status lvo_builtin_models(char* buf, size_t cap, size_t* needed);

/* "log", "exponential", "power:<p>", "custom:<a>,<gamma>,<f'(1)>,<f(1)>". */
LVO_API lvo_status lvo_divergence_parse(const char* text, lvo_divergence** out);
LVO_API void lvo_divergence_free(lvo_divergence* div);
/* params = {a, gamma, f'(1), f(1)}. */
LVO_API lvo_status lvo_divergence_params(const lvo_divergence* div, double params[4]);
LVO_API lvo_status lvo_divergence_fprime(const lvo_divergence* div, double x, double* out);
LVO_API lvo_status lvo_divergence_utility(const lvo_divergence* div, double x, double* out);

/* Solves for the Girsanov pair of the divergence-minimal martingale measure. */
LVO_API lvo_status lvo_measure_solve(const lvo_model* model, const lvo_divergence* div,
                                     double tol, lvo_measure** out);
LVO_API void lvo_measure_free(lvo_measure* measure);
LVO_API lvo_status lvo_measure_beta(const lvo_measure* measure, double* beta, size_t cap,
                                    size_t* dim);
LVO_API lvo_status lvo_measure_residual(const lvo_measure* measure, double* out);
/* 1 when every condition passed, 0 otherwise. */
LVO_API int lvo_measure_conditions_passed(const lvo_measure* measure);
LVO_API lvo_status lvo_measure_hellinger(const lvo_measure* measure, double* out);
LVO_API lvo_status lvo_measure_kappa_q(const lvo_measure* measure, double theta, double* out);
LVO_API lvo_status lvo_measure_ratio(const lvo_measure* measure, const double* y, double* out);

LVO_API lvo_status lvo_strategy_make(const lvo_measure* measure, double capital,
                                     lvo_strategy** out);
LVO_API void lvo_strategy_free(lvo_strategy* strategy);
LVO_API lvo_status lvo_strategy_lambda(const lvo_strategy* strategy, double* out);
/* 1 for the c = 0 branch (gamma constants), 0 for the diffusive one. */
LVO_API int lvo_strategy_pure_jump(const lvo_strategy* strategy);
LVO_API lvo_status lvo_strategy_coef(const lvo_strategy* strategy, double* coef, size_t cap,
                                     size_t* dim);
/* Shares held at time t from the left limits Z_{t-} and S_{t-}. */
LVO_API lvo_status lvo_strategy_shares(const lvo_strategy* strategy, double t, double z_minus,
                                       const double* s_minus, double* shares);
/* rho(t, z) = E_Q[f'(lambda Z_T) | Z_t = z]; optimal wealth is -rho. */
LVO_API lvo_status lvo_strategy_rho(const lvo_strategy* strategy, double t, double z,
                                    double* out);

/* Run configuration: string keys model, divergence, capital, paths, grid,
 * seed, tol, out, suite, measure. */
LVO_API lvo_status lvo_run_config_new(lvo_run_config** out);
LVO_API void lvo_run_config_free(lvo_run_config* cfg);
LVO_API lvo_status lvo_run_config_set(lvo_run_config* cfg, const char* key, const char* value);
/* Commands: "model validate", "measure solve", "simulate",
 * "strategy evaluate", "verify run", "report". */
LVO_API lvo_status lvo_run(const char* command, lvo_run_config* cfg);
/* Human-readable output of the last lvo_run on cfg. */
LVO_API lvo_status lvo_run_output(const lvo_run_config* cfg, char* buf, size_t cap,
                                  size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
