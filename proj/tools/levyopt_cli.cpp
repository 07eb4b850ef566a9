#include <levyopt/levyopt.h>

#include <CLI11.hpp>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace {

struct Options {
  std::string model;
  std::string divergence;
  std::string capital;
  std::string paths;
  std::string grid;
  std::string seed;
  std::string tol;
  std::string out;
  std::string suite;
  std::string measure;
};

void add_common(CLI::App* app, Options& o, bool with_model = true) {
  if (with_model) app->add_option("--model", o.model, "built-in model name or config file");
  app->add_option("--divergence", o.divergence, "log | exponential | power:<p> | custom:a,g,f1',f1");
  app->add_option("--out", o.out, "output directory (default $LEVYOPT_OUT_DIR or levyopt_out)");
  app->add_option("--tol", o.tol, "solver tolerance on |G(beta)|");
}

void add_sim(CLI::App* app, Options& o) {
  app->add_option("--paths", o.paths, "number of simulated paths");
  app->add_option("--grid", o.grid, "time steps on [0, T]");
  app->add_option("--seed", o.seed, "master seed (unsigned 64-bit)");
}

int exit_code(lvo_status s) {
  switch (s) {
    case LVO_OK: return 0;
    case LVO_ERR_CONFIG:
    case LVO_ERR_DOMAIN:
    case LVO_ERR_INVALID_ARGUMENT: return 2;
    case LVO_ERR_SOLVER:
    case LVO_ERR_DIVERGENT: return 3;
    case LVO_ERR_VERIFICATION: return 4;
    default: return 1;
  }
}

int run(const std::string& command, const Options& o) {
  lvo_run_config* cfg = nullptr;
  if (lvo_run_config_new(&cfg) != LVO_OK) {
    std::fprintf(stderr, "levyopt: %s\n", lvo_last_error());
    return 1;
  }
  const std::map<std::string, const std::string*> keys{
      {"model", &o.model}, {"divergence", &o.divergence}, {"capital", &o.capital},
      {"paths", &o.paths}, {"grid", &o.grid},             {"seed", &o.seed},
      {"tol", &o.tol},     {"out", &o.out},               {"suite", &o.suite},
      {"measure", &o.measure}};
  for (const auto& [k, v] : keys) {
    if (!v->empty()) lvo_run_config_set(cfg, k.c_str(), v->c_str());
  }
  const lvo_status st = lvo_run(command.c_str(), cfg);
  size_t needed = 0;
  lvo_run_output(cfg, nullptr, 0, &needed);
  std::vector<char> text(needed);
  if (needed > 1 && lvo_run_output(cfg, text.data(), text.size(), &needed) == LVO_OK) {
    std::fputs(text.data(), stdout);
  }
  if (st != LVO_OK) {
    std::fprintf(stderr, "levyopt: %s: %s\n", lvo_status_name(st), lvo_last_error());
  }
  lvo_run_config_free(cfg);
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divergence-minimal martingale measures and optimal strategies for exponential Levy models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lvo_version()));
  Options o;
  std::string command;

  auto* model = app.add_subcommand("model", "model operations");
  model->require_subcommand(1);
  auto* validate = model->add_subcommand("validate", "check a model config");
  validate->add_option("--model", o.model, "built-in model name or config file")->required();
  validate->add_option("--out", o.out, "output directory");
  validate->callback([&] { command = "model validate"; });

  auto* measure = app.add_subcommand("measure", "martingale measure");
  measure->require_subcommand(1);
  auto* solve = measure->add_subcommand("solve", "solve for the Girsanov pair");
  add_common(solve, o);
  solve->callback([&] { command = "measure solve"; });

  auto* simulate = app.add_subcommand("simulate", "simulate paths to CSV");
  add_common(simulate, o);
  add_sim(simulate, o);
  simulate->add_option("--measure", o.measure, "P or Q (default Q)");
  simulate->callback([&] { command = "simulate"; });

  auto* strategy = app.add_subcommand("strategy", "optimal strategy");
  strategy->require_subcommand(1);
  auto* evaluate = strategy->add_subcommand("evaluate", "evaluate phi-hat on simulated paths");
  add_common(evaluate, o);
  add_sim(evaluate, o);
  evaluate->add_option("--capital", o.capital, "initial capital x");
  evaluate->callback([&] { command = "strategy evaluate"; });

  auto* verify = app.add_subcommand("verify", "verification suites");
  verify->require_subcommand(1);
  auto* vrun = verify->add_subcommand("run", "run verification suites");
  add_common(vrun, o);
  add_sim(vrun, o);
  vrun->add_option("--capital", o.capital, "initial capital x");
  vrun->add_option("--suite", o.suite, "martingale | representation | preservation | dominance | all")
      ->check(CLI::IsMember({"martingale", "representation", "preservation", "dominance", "all"}));
  vrun->callback([&] { command = "verify run"; });

  auto* rep = app.add_subcommand("report", "summarise the summaries in the output directory");
  rep->add_option("--out", o.out, "output directory");
  rep->callback([&] { command = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(command, o);
}
