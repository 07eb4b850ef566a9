#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "app/run.hpp"
#include "core/errors.hpp"
#include "support.hpp"

using namespace levyopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("levyopt_test_app_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig config(std::map<std::string, std::string> keys) { return resolve_run_config(keys); }

}  // namespace

TEST_CASE("bundled config files equal the built-ins") {
  int files = 0;
  for (const auto& entry : fs::directory_iterator(LEVYOPT_CONFIG_DIR)) {
    const fs::path file = entry.path();
    if (file.extension() != ".cfg") continue;
    ++files;
    const std::string name = file.stem().string();
    CAPTURE(name);
    REQUIRE(is_builtin_model(name));
    const auto from_file = load_model_config(file.string());
    const auto builtin = builtin_model(name);
    CHECK(format_model_config(from_file.model) == format_model_config(builtin.model));
    CHECK(from_file.defaults == builtin.defaults);
    CHECK(validate_model(builtin.model).empty());
  }
  CHECK(files >= 4);
  for (const auto& name : bundled_model_names())
    CHECK(fs::exists(fs::path(LEVYOPT_CONFIG_DIR) / (name + ".cfg")));
  CHECK(bundled_model_names().size() == 4);
}

TEST_CASE("config round trip and parse errors") {
  for (const auto& name : builtin_model_names()) {
    const auto m = builtin_model(name).model;
    const auto back = parse_model_config(format_model_config(m), "roundtrip");
    CHECK(format_model_config(back.model) == format_model_config(m));
  }
  const std::string base = "[model]\nname = t\ndim = 1\ndrift = 0.05\ngauss_c = 0.04\n";
  CHECK_NOTHROW(parse_model_config(base, "t"));
  CHECK_THROWS_AS(parse_model_config(base + "[bogus]\nx = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_model_config("[model]\nname = t\ndim = 1\ndrift = abc\ngauss_c = 0.04\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_model_config(base + "[jumps]\nkind = levy_flight\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_model_config("[model]\nname = t\ndim = 2\ndrift = 0.05\ngauss_c = 0.04\n", "t"), ConfigError);
  CHECK_THROWS_AS(load_model_config("no_such_model"), ConfigError);

  const auto atoms = parse_model_config(
      base + "[jumps]\nkind = atoms\nlocations = -0.2; 0.1\nweights = 1, 0.5\n[divergence]\npreset = power:0.5\n", "t");
  REQUIRE(atoms.model.triplet.jumps.atom_list().size() == 2);
  CHECK(atoms.model.triplet.jumps.atom_list()[1].weight == 0.5);
  CHECK(atoms.defaults.at("divergence") == "power:0.5");
}

TEST_CASE("run config resolution") {
  const auto cfg = config({{"model", "black_scholes"}, {"paths", "123"}, {"seed", "18446744073709551615"}});
  CHECK(cfg.paths.value() == 123);
  CHECK(cfg.seed == 18446744073709551615ull);
  CHECK(cfg.divergence.preset() == DivergencePreset::Log);
  CHECK(config({}).verify_models == bundled_model_names());
  CHECK(config({{"model", "single_atom_pure_jump"}}).divergence.gamma() == doctest::Approx(-3.0));
  CHECK(config({{"model", "single_atom_pure_jump"}, {"divergence", "log"}}).divergence.gamma() == -2.0);
  CHECK_THROWS_AS(config({{"paths", "0"}}), ConfigError);
  CHECK_THROWS_AS(config({{"seed", "-1"}}), ConfigError);
  CHECK_THROWS_AS(config({{"grid", "x"}}), ConfigError);
  CHECK_THROWS_AS(config({{"measure", "R"}}), ConfigError);
  CHECK_THROWS_AS(config({{"colour", "blue"}}), ConfigError);

  ::setenv("LEVYOPT_OUT_DIR", "/tmp/levyopt_env_dir", 1);
  CHECK(config({}).out_dir == "/tmp/levyopt_env_dir");
  CHECK(config({{"out", "explicit"}}).out_dir == "explicit");
  ::unsetenv("LEVYOPT_OUT_DIR");
  CHECK(config({}).out_dir == "levyopt_out");
}

TEST_CASE("measure solve on black_scholes") {
  const auto dir = scratch("solve");
  const auto res = run_command("measure solve", config({{"model", "black_scholes"}, {"out", dir.string()}}));
  CHECK(res.status == 0);
  const auto s = nlohmann::json::parse(slurp(dir / "measure_summary.json"));
  CHECK(std::abs(s["beta"][0].get<double>() + 1.75) < 1e-10);
  CHECK(s["hellinger_half"]["value"].get<double>() == doctest::Approx(0.06125).epsilon(1e-10));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["command"] == "measure solve");
  CHECK(manifest["status"] == 0);
  CHECK(res.text.find("beta") != std::string::npos);
}

TEST_CASE("command errors") {
  const auto dir = scratch("errors");
  try {
    run_command("model validate", config({{"model", "black_scholes"}, {"out", dir.string()}}));
  } catch (...) {
    FAIL("valid model rejected");
  }
  const fs::path bad = dir / "negative_c.cfg";
  fs::create_directories(dir);
  std::ofstream(bad) << "[model]\nname = bad\ndim = 1\ndrift = 0.05\ngauss_c = -0.04\n";
  try {
    run_command("model validate", config({{"model", bad.string()}, {"out", dir.string()}}));
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gauss_c not PSD") != std::string::npos);
  }
  CHECK_THROWS_AS(run_command("measure solve", config({{"model", "cdsec1_violation"}, {"out", dir.string()}})),
                  SolverError);
  CHECK_THROWS_AS(run_command("measure solve", config({{"model", "cdsec2_divergent"}, {"out", dir.string()}})),
                  SolverError);
  CHECK_THROWS_AS(run_command("frobnicate", config({{"out", dir.string()}})), ConfigError);
  CHECK_THROWS_AS(run_command("report", config({{"out", (dir / "empty").string()}})), ConfigError);
}

TEST_CASE("simulate, strategy evaluate and report") {
  const auto dir = scratch("sim");
  const auto base = std::map<std::string, std::string>{
      {"model", "merton_jump"}, {"out", dir.string()}, {"paths", "20"}, {"grid", "10"}};
  CHECK(run_command("simulate", config(base)).status == 0);
  CHECK(fs::exists(dir / "paths.csv"));
  CHECK(slurp(dir / "paths.csv").rfind("path_id,t,", 0) == 0);
  CHECK(run_command("strategy evaluate", config(base)).status == 0);
  const auto s = nlohmann::json::parse(slurp(dir / "strategy_summary.json"));
  CHECK(s["branch"] == "diffusive");
  CHECK(run_command("strategy_evaluate", config(base)).status == 0);
  const auto rep = run_command("report", config({{"out", dir.string()}}));
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(rep.text.find("lambda") != std::string::npos);

  const auto pj = scratch("pure_jump");
  CHECK(run_command("strategy evaluate",
                    config({{"model", "single_atom_pure_jump"}, {"out", pj.string()}, {"paths", "50"}}))
            .status == 0);
  const auto sj = nlohmann::json::parse(slurp(pj / "strategy_summary.json"));
  CHECK(sj["branch"] == "pure_jump");
  CHECK(sj["gamma_vec"]["analytic"][0].get<double>() ==
        doctest::Approx(sj["beta"][0].get<double>() / 2.0).epsilon(1e-12));
}

TEST_CASE("verify run is deterministic") {
  const auto a = scratch("verify_a"), b = scratch("verify_b");
  auto keys = std::map<std::string, std::string>{{"model", "black_scholes"}, {"paths", "2000"}, {"grid", "40"},
                                                 {"suite", "all"}};
  keys["out"] = a.string();
  const auto ra = run_command("verify run", config(keys));
  keys["out"] = b.string();
  const auto rb = run_command("verify run", config(keys));
  CHECK(ra.status == rb.status);
  CHECK(ra.text == rb.text);
  int csvs = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() == "manifest.json") continue;
    CAPTURE(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    if (e.path().extension() == ".csv") ++csvs;
  }
  CHECK(csvs >= 5);
}
