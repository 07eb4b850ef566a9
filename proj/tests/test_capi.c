#include <levyopt/levyopt.h>

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void test_general(void) {
  EXPECT(strcmp(lvo_version(), "1.0.0") == 0);
  EXPECT(strcmp(lvo_status_name(LVO_OK), "ok") == 0);
  EXPECT(strcmp(lvo_status_name(LVO_ERR_SOLVER), "solver failure") == 0);
  size_t needed = 0;
  EXPECT(lvo_builtin_models(NULL, 0, &needed) == LVO_ERR_BUFFER_TOO_SMALL);
  EXPECT(needed > 1);
  char* names = malloc(needed);
  EXPECT(lvo_builtin_models(names, needed, &needed) == LVO_OK);
  EXPECT(strstr(names, "black_scholes") != NULL);
  EXPECT(strstr(names, "single_atom_pure_jump") != NULL);
  free(names);
}

static void test_divergence(void) {
  lvo_divergence* div = NULL;
  EXPECT(lvo_divergence_parse("power:0.5", &div) == LVO_OK);
  double p[4];
  EXPECT(lvo_divergence_params(div, p) == LVO_OK);
  EXPECT(fabs(p[0] - 2.0) < 1e-14 && fabs(p[1] + 3.0) < 1e-14 && p[2] == -1.0);
  double v = 0.0;
  EXPECT(lvo_divergence_fprime(div, 2.0, &v) == LVO_OK);
  EXPECT(fabs(v + 0.25) < 1e-15);
  EXPECT(lvo_divergence_fprime(div, -1.0, &v) == LVO_ERR_DOMAIN);
  EXPECT(strlen(lvo_last_error()) > 0);
  EXPECT(lvo_divergence_utility(div, 4.0, &v) == LVO_OK);
  EXPECT(fabs(v - 4.0) < 1e-14);
  lvo_divergence_free(div);
  EXPECT(lvo_divergence_parse("entropy", &div) == LVO_ERR_CONFIG);
  EXPECT(lvo_divergence_parse(NULL, &div) == LVO_ERR_INVALID_ARGUMENT);
}

static void test_black_scholes(void) {
  lvo_model* model = NULL;
  lvo_divergence* div = NULL;
  lvo_measure* measure = NULL;
  lvo_strategy* strategy = NULL;
  EXPECT(lvo_model_load("black_scholes", &model) == LVO_OK);
  EXPECT(lvo_model_dim(model) == 1);
  EXPECT(lvo_model_validate(model) == LVO_OK);
  EXPECT(lvo_divergence_parse("log", &div) == LVO_OK);
  EXPECT(lvo_measure_solve(model, div, 1e-12, &measure) == LVO_OK);

  double beta = 0.0;
  size_t dim = 0;
  EXPECT(lvo_measure_beta(measure, &beta, 1, &dim) == LVO_OK);
  EXPECT(dim == 1);
  EXPECT(fabs(beta + 1.75) < 1e-10);
  EXPECT(lvo_measure_beta(measure, NULL, 0, &dim) == LVO_ERR_BUFFER_TOO_SMALL);
  EXPECT(lvo_measure_conditions_passed(measure) == 1);
  double h = 0.0, k = 1.0, r = 1.0, y = 0.1, ratio = 0.0;
  EXPECT(lvo_measure_hellinger(measure, &h) == LVO_OK);
  EXPECT(fabs(h - 0.06125) < 1e-12);
  EXPECT(lvo_measure_kappa_q(measure, -1.0, &k) == LVO_OK);
  EXPECT(fabs(k) < 1e-12);
  EXPECT(lvo_measure_residual(measure, &r) == LVO_OK);
  EXPECT(r < 1e-12);
  EXPECT(lvo_measure_ratio(measure, &y, &ratio) == LVO_OK);
  EXPECT(fabs(ratio - 1.0 / (1.0 + 1.75 * expm1(0.1))) < 1e-14);

  EXPECT(lvo_strategy_make(measure, 2.0, &strategy) == LVO_OK);
  double lambda = 0.0;
  EXPECT(lvo_strategy_lambda(strategy, &lambda) == LVO_OK);
  EXPECT(fabs(lambda - 0.5) < 1e-15);
  EXPECT(lvo_strategy_pure_jump(strategy) == 0);
  double s = 1.3, shares = 0.0, rho = 0.0;
  EXPECT(lvo_strategy_shares(strategy, 0.4, 0.8, &s, &shares) == LVO_OK);
  EXPECT(lvo_strategy_rho(strategy, 0.4, 0.8, &rho) == LVO_OK);
  EXPECT(fabs(rho + 2.0 / 0.8) < 1e-12);
  EXPECT(fabs(shares * s / (-rho) - 1.75) < 1e-12);

  lvo_strategy_free(strategy);
  lvo_measure_free(measure);
  lvo_divergence_free(div);
  lvo_model_free(model);
}

static void test_failures(void) {
  lvo_model* model = NULL;
  lvo_divergence* div = NULL;
  lvo_measure* measure = NULL;
  EXPECT(lvo_divergence_parse("log", &div) == LVO_OK);

  EXPECT(lvo_model_load("cdsec1_violation", &model) == LVO_OK);
  EXPECT(lvo_measure_solve(model, div, 1e-10, &measure) == LVO_ERR_SOLVER);
  EXPECT(lvo_last_solver_failure() == LVO_SOLVER_POSITIVITY);
  EXPECT(measure == NULL);
  lvo_model_free(model);

  lvo_divergence* ex = NULL;
  EXPECT(lvo_divergence_parse("exponential", &ex) == LVO_OK);
  EXPECT(lvo_model_load("cdsec2_divergent", &model) == LVO_OK);
  EXPECT(lvo_measure_solve(model, ex, 1e-10, &measure) == LVO_ERR_SOLVER);
  EXPECT(lvo_last_solver_failure() == LVO_SOLVER_INTEGRABILITY);
  lvo_model_free(model);
  lvo_divergence_free(ex);

  const char* bad = "[model]\nname = bad\ndim = 1\ndrift = 0.05\ngauss_c = -0.04\n";
  EXPECT(lvo_model_from_string(bad, &model) == LVO_OK);
  EXPECT(lvo_model_validate(model) == LVO_ERR_CONFIG);
  EXPECT(strstr(lvo_last_error(), "gauss_c not PSD") != NULL);
  lvo_model_free(model);

  EXPECT(lvo_model_load("no_such_model", &model) == LVO_ERR_CONFIG);
  EXPECT(lvo_model_from_string("[nonsense", &model) == LVO_ERR_CONFIG);
  lvo_divergence_free(div);
}

static void test_pure_jump(void) {
  lvo_model* model = NULL;
  lvo_divergence* div = NULL;
  lvo_measure* measure = NULL;
  lvo_strategy* strategy = NULL;
  EXPECT(lvo_model_load("single_atom_pure_jump", &model) == LVO_OK);
  EXPECT(lvo_divergence_parse("power:0.5", &div) == LVO_OK);
  EXPECT(lvo_measure_solve(model, div, 1e-12, &measure) == LVO_OK);
  EXPECT(lvo_strategy_make(measure, 1.0, &strategy) == LVO_OK);
  EXPECT(lvo_strategy_pure_jump(strategy) == 1);
  double beta = 0.0, coef = 0.0;
  size_t dim = 0;
  EXPECT(lvo_measure_beta(measure, &beta, 1, &dim) == LVO_OK);
  EXPECT(lvo_strategy_coef(strategy, &coef, 1, &dim) == LVO_OK);
  EXPECT(fabs(coef - beta / 2.0) < 1e-12);
  lvo_strategy_free(strategy);
  lvo_measure_free(measure);
  lvo_divergence_free(div);
  lvo_model_free(model);
}

static void test_run(const char* out_dir) {
  lvo_run_config* cfg = NULL;
  EXPECT(lvo_run_config_new(&cfg) == LVO_OK);
  EXPECT(lvo_run_config_set(cfg, "model", "black_scholes") == LVO_OK);
  EXPECT(lvo_run_config_set(cfg, "out", out_dir) == LVO_OK);
  EXPECT(lvo_run("measure solve", cfg) == LVO_OK);
  size_t needed = 0;
  EXPECT(lvo_run_output(cfg, NULL, 0, &needed) == LVO_ERR_BUFFER_TOO_SMALL);
  char* text = malloc(needed);
  EXPECT(lvo_run_output(cfg, text, needed, &needed) == LVO_OK);
  EXPECT(strstr(text, "-1.75") != NULL);
  free(text);
  EXPECT(lvo_run("no such command", cfg) == LVO_ERR_CONFIG);
  EXPECT(lvo_run_config_set(cfg, "model", "cdsec1_violation") == LVO_OK);
  EXPECT(lvo_run("measure solve", cfg) == LVO_ERR_SOLVER);
  lvo_run_config_free(cfg);
}

int main(int argc, char** argv) {
  test_general();
  test_divergence();
  test_black_scholes();
  test_failures();
  test_pure_jump();
  test_run(argc > 1 ? argv[1] : "levyopt_capi_out");
  if (failures) {
    fprintf(stderr, "%d failures\n", failures);
    return 1;
  }
  printf("c api: all checks passed\n");
  return 0;
}
