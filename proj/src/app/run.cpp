#include "app/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "core/errors.hpp"
#include "verify/verification.hpp"

namespace levyopt {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json estimate_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n},
          {"target", e.target}, {"z_score", number_or_null(e.z_score)}};
}

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  }
  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Prepared {
  MarketModel model;
  LevyTriplet full;  // discounted
  LevyTriplet sim;   // small jumps truncated for simulation
  bool truncated = false;
};

Prepared prepare(const MarketModel& model) {
  const auto problems = validate_model(model);
  if (!problems.empty()) {
    std::string msg = "invalid model '" + model.name + "': ";
    for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
    throw ConfigError(msg);
  }
  Prepared p{model, discounted_triplet(model), {}, false};
  p.truncated = !p.full.jumps.empty() && !p.full.jumps.finite_activity();
  p.sim = p.truncated
              ? truncate_small_jumps(p.full, model.sim.epsilon, model.sim.gaussian_correction)
              : p.full;
  return p;
}

GirsanovPair solve(const LevyTriplet& tr, const DivergenceSpec& spec, double tol) {
  SolverOptions opts;
  opts.tol = tol;
  return solve_beta(tr, spec, opts);
}

json jumps_json(const JumpMeasure& nu) {
  json j;
  switch (nu.kind()) {
    case JumpMeasure::Kind::None:
      j["kind"] = "none";
      break;
    case JumpMeasure::Kind::Atoms: {
      j["kind"] = "atoms";
      json atoms = json::array();
      for (const auto& a : nu.atom_list()) {
        atoms.push_back({{"location", vec_json(a.location)}, {"weight", a.weight}});
      }
      j["atoms"] = atoms;
      break;
    }
    case JumpMeasure::Kind::Density: {
      j["kind"] = "density";
      j["shape"] = nu.density_shape().name();
      j["tilted"] = nu.tilt().has_value();
      if (nu.inner_cutoff() > 0.0) j["inner_cutoff"] = nu.inner_cutoff();
      if (nu.finite_activity()) {
        TailGrowth growth;
        if (nu.tilt()) {
          growth = max(nu.tilt()->growth(), TailGrowth::bounded()) +
                   TailGrowth{Growth::exponential(kLogSlack), Growth::exponential(kLogSlack)};
        }
        j["mass"] = integrate_jumps(nu, [](std::span<const double>) { return 1.0; }, growth);
      } else {
        j["mass"] = nullptr;
      }
      break;
    }
  }
  return j;
}

json conditions_json(const ConditionReport& c) {
  json moments = json::array();
  for (const auto& m : c.moments) {
    moments.push_back({{"theta", m.theta}, {"finite", m.finite},
                       {"kappa_p", number_or_null(m.kappa_p)}});
  }
  return {{"cdsec1", c.cdsec1},           {"cdsec1_detail", c.cdsec1_detail},
          {"cdsec2", c.cdsec2},           {"cdsec2_detail", c.cdsec2_detail},
          {"cdsec3", c.cdsec3},           {"residual_norm", c.residual_norm},
          {"integcd", c.integcd},         {"moments", moments},
          {"notes", c.notes},             {"all_passed", c.all_passed()}};
}

json model_json(const Prepared& p) {
  return {{"name", p.model.name},
          {"dim", p.full.dim},
          {"drift_discounted", vec_json(p.full.drift)},
          {"gauss_c", mat_json(p.full.gauss)},
          {"jumps", jumps_json(p.full.jumps)},
          {"spot", vec_json(p.model.spot)},
          {"rate", p.model.rate},
          {"horizon", p.model.horizon},
          {"small_jumps_truncated", p.truncated}};
}

json run_inputs(const RunConfig& cfg) {
  json raw = json::object();
  for (const auto& [k, v] : cfg.raw) raw[k] = v;
  return {{"model_source", cfg.model.source},
          {"divergence", cfg.divergence.name()},
          {"capital", cfg.capital},
          {"paths", cfg.paths ? json(*cfg.paths) : json(nullptr)},
          {"grid", cfg.grid},
          {"seed", cfg.seed},
          {"tol", cfg.tol},
          {"suite", cfg.suite},
          {"measure", tag_name(cfg.measure)},
          {"options", raw}};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(Artifacts& out, const std::string& command, const RunConfig& cfg,
                    int status) {
  json m;
  m["tool"] = "levyopt";
  m["version"] = kLevyoptVersion;
  m["command"] = command;
  m["timestamp"] = utc_timestamp();
  m["status"] = status;
  m["inputs"] = run_inputs(cfg);
  m["model_config"] = format_model_config(cfg.model.model);
  m["outputs"] = out.files();
  out.write_json("manifest.json", m);
}

int round_up(int n, int k) { return ((n + k - 1) / k) * k; }

// ---- model validate -----------------------------------------------------

RunResult model_validate(const RunConfig& cfg, Artifacts& out) {
  const auto& model = cfg.model.model;
  const auto problems = validate_model(model);
  json s;
  s["model"] = model.name;
  s["valid"] = problems.empty();
  s["messages"] = problems;
  out.write_json("model_summary.json", s);
  if (!problems.empty()) {
    std::string msg = "invalid model '" + model.name + "': ";
    for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
    throw ConfigError(msg);
  }
  RunResult r;
  r.text = "model " + model.name + ": valid\n";
  return r;
}

// ---- measure solve ------------------------------------------------------

RunResult measure_solve(const RunConfig& cfg, Artifacts& out) {
  const auto prep = prepare(cfg.model.model);
  const auto& spec = cfg.divergence;
  const auto pair = solve(prep.full, spec, cfg.tol);
  const double T = prep.model.horizon;
  const auto hell = hellinger_half(prep.full, pair, T);
  const auto q = q_triplet(prep.full, pair);
  const DensityMomentCurve curve(prep.full, pair.ratio, MeasureTag::Q);

  json kappa;
  auto kq = [&](double th) -> json {
    return curve.finite(th) ? json(curve.kappa(th)) : json(nullptr);
  };
  kappa["kappa_q_0"] = kq(0.0);
  kappa["kappa_q_minus_1"] = kq(-1.0);
  kappa["kappa_q_gamma_plus_1"] = kq(spec.gamma() + 1.0);
  kappa["q_mean_rate"] = curve.q_mean_rate();

  json s;
  s["model"] = model_json(prep);
  s["divergence"] = {{"name", spec.name()},       {"a", spec.a()},
                     {"gamma", spec.gamma()},     {"fprime1", spec.fprime_at_1()},
                     {"f1", spec.f_at_1()}};
  s["beta"] = vec_json(pair.beta);
  s["residual_norm"] = pair.residual_norm;
  s["iterations"] = pair.iterations;
  s["conditions"] = conditions_json(pair.conditions);
  s["q_triplet"] = {{"drift", vec_json(q.drift)},
                    {"gauss_c", mat_json(q.gauss)},
                    {"jumps", jumps_json(q.jumps)}};
  s["hellinger_half"] = {{"horizon", T}, {"value", number_or_null(hell.value)},
                         {"diagnostic", hell.diagnostic}};
  s["kappa"] = kappa;
  out.write_json("measure_summary.json", s);

  std::ostringstream os;
  os << "model        " << prep.model.name << "\n"
     << "divergence   " << spec.name() << "\n";
  for (Eigen::Index i = 0; i < pair.beta.size(); ++i) {
    os << "beta[" << i << "]      " << g17(pair.beta[i]) << "\n";
  }
  os << "residual     " << short_num(pair.residual_norm) << "  (" << pair.iterations
     << " iterations)\n"
     << "cdsec1       " << (pair.conditions.cdsec1 ? "ok" : "FAILED") << "\n"
     << "cdsec2       " << (pair.conditions.cdsec2 ? "ok" : "FAILED") << "\n"
     << "cdsec3       " << (pair.conditions.cdsec3 ? "ok" : "FAILED") << "\n"
     << "integrable   " << (pair.conditions.integcd ? "ok" : "FAILED") << "\n"
     << "hellinger    " << short_num(hell.value) << "\n";
  RunResult r;
  r.text = os.str();
  if (!pair.conditions.all_passed()) {
    r.status = 3;
    r.text += "conditions not satisfied\n";
  }
  return r;
}

// ---- simulate -----------------------------------------------------------

RunResult simulate(const RunConfig& cfg, Artifacts& out) {
  const auto prep = prepare(cfg.model.model);
  const auto pair = solve(prep.sim, cfg.divergence, cfg.tol);
  const std::uint64_t n = cfg.paths.value_or(100);
  const PathSimulator sim(prep.sim, pair, prep.model.spot, prep.model.horizon, cfg.grid,
                          cfg.measure, cfg.seed);
  const int d = prep.sim.dim;
  std::ostringstream csv;
  csv << "path_id,t";
  for (int i = 0; i < d; ++i) csv << ",X" << i + 1;
  for (int i = 0; i < d; ++i) csv << ",S" << i + 1;
  csv << ",Z,is_jump\n";
  std::uint64_t jumps = 0;
  McAccumulator terminal;
  for (std::uint64_t p = 0; p < n; ++p) {
    const auto path = sim.path(p);
    for (std::size_t k = 0; k < path.nodes(); ++k) {
      csv << p << ',' << g17(path.t[k]);
      for (int i = 0; i < d; ++i) csv << ',' << g17(path.x(k, i));
      for (int i = 0; i < d; ++i) csv << ',' << g17(path.s(k, i));
      csv << ',' << g17(path.Z[k]) << ',' << (path.is_jump[k] ? 1 : 0) << '\n';
      if (path.is_jump[k]) ++jumps;
    }
    terminal.add(path.s(path.last(), 0));
  }
  out.write("paths.csv", csv.str());
  json s;
  s["model"] = prep.model.name;
  s["divergence"] = cfg.divergence.name();
  s["measure"] = tag_name(cfg.measure);
  s["paths"] = n;
  s["grid"] = cfg.grid;
  s["seed"] = cfg.seed;
  s["beta"] = vec_json(pair.beta);
  s["jumps"] = jumps;
  s["small_jumps_truncated"] = prep.truncated;
  s["terminal_S1"] = estimate_json(terminal.estimate(prep.model.spot[0]));
  out.write_json("simulate_summary.json", s);
  RunResult r;
  r.text = "simulated " + std::to_string(n) + " paths under " + tag_name(cfg.measure) +
           " (" + std::to_string(jumps) + " jumps) -> paths.csv\n";
  return r;
}

// ---- strategy evaluate --------------------------------------------------

double wealth_fraction(const StrategySolution& sol, double t, double z, const Vector& s) {
  const Vector phi = strategy_at(sol, t, z, s);
  return phi.cwiseProduct(s)[0] / -solution_rho(sol, t, z);
}

RunResult strategy_evaluate(const RunConfig& cfg, Artifacts& out) {
  const auto prep = prepare(cfg.model.model);
  const auto& spec = cfg.divergence;
  const auto pair = solve(prep.sim, spec, cfg.tol);
  const double T = prep.model.horizon;
  const auto sol = make_strategy(prep.sim, spec, pair, cfg.capital, T);
  const std::uint64_t n = cfg.paths.value_or(10000);
  const PathSimulator sim(prep.sim, pair, prep.model.spot, T, cfg.grid, MeasureTag::P, cfg.seed);

  std::ostringstream csv;
  csv << "path_id,terminal_wealth,closed_form_wealth,residual,Z_T,utility\n";
  McAccumulator util, resid;
  double max_abs = 0.0;
  bool admissible = true;
  for (std::uint64_t p = 0; p < n; ++p) {
    const auto path = sim.path(p);
    const double v = euler_terminal_wealth(sol, sol.coef, path, 1);
    const double zT = path.Z[path.last()];
    const double closed = -spec.fprime(sol.lambda * zT);
    const double u = v > spec.wealth_floor() ? spec.utility(v)
                                             : -std::numeric_limits<double>::infinity();
    if (!(v > spec.wealth_floor())) admissible = false;
    util.add(u);
    resid.add((v - closed) * (v - closed));
    max_abs = std::max(max_abs, std::abs(v - closed));
    csv << p << ',' << g17(v) << ',' << g17(closed) << ',' << g17(v - closed) << ','
        << g17(zT) << ',' << g17(u) << '\n';
  }
  out.write("wealth.csv", csv.str());

  json s;
  s["model"] = prep.model.name;
  s["divergence"] = spec.name();
  s["capital"] = cfg.capital;
  s["horizon"] = T;
  s["paths"] = n;
  s["grid"] = cfg.grid;
  s["seed"] = cfg.seed;
  s["lambda"] = sol.lambda;
  s["beta"] = vec_json(pair.beta);
  s["branch"] = sol.branch == StrategyBranch::PureJump ? "pure_jump" : "diffusive";
  s["coef"] = vec_json(sol.coef);
  if (sol.branch == StrategyBranch::PureJump) {
    Vector y0 = Vector::Zero(prep.sim.dim);
    if (prep.sim.jumps.kind() == JumpMeasure::Kind::Atoms) {
      y0 = prep.sim.jumps.atom_list().front().location;
    }
    const auto gc = compute_gamma_constants(prep.sim, spec, pair, y0);
    s["gamma_vec"] = {{"analytic", vec_json(gc.analytic)},
                      {"finite_difference", vec_json(gc.finite_difference)},
                      {"discrepancy", gc.discrepancy},
                      {"y0", vec_json(gc.y0)},
                      {"note", gc.note}};
  }
  s["kappa_q_gamma_plus_1"] = sol.kappa_g1;
  s["q_mean_rate"] = sol.q_mean;
  s["rho_0"] = solution_rho(sol, 0.0, 1.0);
  s["wealth_fraction_t0"] = wealth_fraction(sol, 0.0, 1.0, prep.model.spot);
  s["expected_utility"] = estimate_json(util.estimate(spec.utility(cfg.capital)));
  s["closed_form_utility_note"] = "target is u(x)";
  s["all_paths_admissible"] = admissible;
  s["residual_rms"] = std::sqrt(resid.mean());
  s["residual_max_abs"] = max_abs;
  s["notes"] = sol.notes;
  out.write_json("strategy_summary.json", s);

  std::ostringstream os;
  os << "model        " << prep.model.name << "\n"
     << "divergence   " << spec.name() << "\n"
     << "lambda       " << g17(sol.lambda) << "\n"
     << "beta         " << g17(pair.beta[0]) << "\n"
     << "coef         " << g17(sol.coef[0]) << "  ("
     << (sol.branch == StrategyBranch::PureJump ? "gamma constants" : "beta") << ")\n"
     << "E_P[u(V_T)]  " << short_num(util.mean()) << " +- "
     << short_num(util.estimate(0.0).std_error) << "\n"
     << "residual rms " << short_num(std::sqrt(resid.mean())) << "\n";
  RunResult r;
  r.text = os.str();
  return r;
}

// ---- verify run ---------------------------------------------------------

struct Check {
  std::string suite;
  std::string name;
  double value;
  double threshold;
  bool passed;
  std::string detail;
};

struct VerifyContext {
  const RunConfig& cfg;
  Prepared prep;
  DivergenceSpec spec;
  GirsanovPair pair;
  StrategySolution sol;
  std::uint64_t n;
  std::uint64_t n_small;
  int grid4;
  std::string prefix;
};

bool decays_or_exact(const RefinementStudy& st, double factor) {
  if (std::all_of(st.rms.begin(), st.rms.end(), [](double r) { return r <= 1e-9; })) return true;
  return st.decays(factor);
}

double min_ratio(const RefinementStudy& st) {
  const auto r = st.ratios();
  return r.empty() ? 0.0 : *std::min_element(r.begin(), r.end());
}

void martingale_suite(VerifyContext& ctx, std::vector<Check>& checks, Artifacts& out) {
  const auto& m = ctx.prep.model;
  const double T = m.horizon;
  const PathSimulator q(ctx.prep.sim, ctx.pair, m.spot, T, ctx.cfg.grid, MeasureTag::Q,
                        ctx.cfg.seed);
  const auto rep = martingale_check(q, 0, ctx.n);
  checks.push_back({"martingale", "terminal_mean_S", std::abs(rep.terminal.z_score), 3.0,
                    rep.terminal.within(3.0), "|z| of E_Q[S_T] - S_0"});

  std::ostringstream csv;
  csv << "step,t,mean,std_error,z_score\n";
  for (std::size_t k = 0; k < rep.drifts.size(); ++k) {
    const auto& e = rep.drifts[k];
    csv << k << ',' << g17(T * (k + 1) / ctx.cfg.grid) << ',' << g17(e.mean) << ','
        << g17(e.std_error) << ',' << g17(e.z_score) << '\n';
  }
  out.write(ctx.prefix + "martingale.csv", csv.str());

  // Test of the test: a wrong beta must show a drift.
  try {
    const Vector wrong = ctx.pair.beta + Vector::Constant(ctx.pair.beta.size(), 0.5);
    const auto bad = make_pair(ctx.prep.sim, ctx.spec, wrong);
    const PathSimulator qb(ctx.prep.sim, bad, m.spot, T, ctx.cfg.grid, MeasureTag::Q,
                           ctx.cfg.seed);
    const auto rb = martingale_check(qb, 0, ctx.n);
    checks.push_back({"martingale", "wrong_beta_detected", std::abs(rb.terminal.z_score), 5.0,
                      std::abs(rb.terminal.z_score) > 5.0, "|z| with beta + 0.5"});
  } catch (const YUndefinedError&) {
    checks.push_back({"martingale", "wrong_beta_detected", 0.0, 5.0, true,
                      "beta + 0.5 leaves Y undefined on supp(nu); nothing to simulate"});
  }

  const auto& spec = ctx.spec;
  const auto& sol = ctx.sol;
  const double g1 = spec.gamma() + 1.0;
  McAccumulator lam, mom;
  for (std::uint64_t i = 0; i < ctx.n; ++i) {
    const auto p = q.path(i);
    const double z = p.Z[p.last()];
    lam.add(-spec.fprime(sol.lambda * z));
    mom.add(std::pow(z, g1));
  }
  const auto le = lam.estimate(ctx.cfg.capital);
  checks.push_back({"martingale", "lambda_calibration", std::abs(le.z_score), 3.0,
                    le.within(3.0), "|z| of E_Q[-f'(lambda Z_T)] - x"});
  const auto me = mom.estimate(std::exp(T * sol.kappa_g1));
  checks.push_back({"martingale", "moment_gamma_plus_1", std::abs(me.z_score), 3.0,
                    me.within(3.0), "|z| of E_Q[Z_T^(gamma+1)] - exp(T kappa)"});
  const DensityMomentCurve curve(ctx.prep.sim, ctx.pair.ratio, MeasureTag::Q);
  const double k0 = std::abs(curve.kappa(0.0));
  const double km1 = std::abs(curve.kappa(-1.0));
  checks.push_back({"martingale", "kappa_q_0", k0, 1e-12, k0 <= 1e-12, "|kappa_Q(0)|"});
  checks.push_back({"martingale", "kappa_q_minus_1", km1, 1e-12, km1 <= 1e-12,
                    "|kappa_Q(-1)|"});
}

void representation_suite(VerifyContext& ctx, std::vector<Check>& checks, Artifacts& out) {
  const auto& m = ctx.prep.model;
  const double T = m.horizon;
  const int fine = 4 * ctx.grid4;
  const PathSimulator q(ctx.prep.sim, ctx.pair, m.spot, T, fine, MeasureTag::Q,
                        ctx.cfg.seed + 1);
  const std::vector<int> strides{4, 2, 1};
  const std::vector<double> times{0.25 * T, 0.5 * T, 0.75 * T};
  const auto term = terminal_identity_study(ctx.sol, q, ctx.n_small, strides);
  const auto rep = representation_residual(ctx.sol, q, ctx.n_small, strides, times);

  std::ostringstream csv;
  csv << "stride,steps,dt,terminal_rms,representation_rms,rms_t25,rms_t50,rms_t75\n";
  for (std::size_t s = 0; s < strides.size(); ++s) {
    csv << strides[s] << ',' << fine / strides[s] << ',' << g17(term.dt[s]) << ','
        << g17(term.rms[s]) << ',' << g17(rep.overall.rms[s]);
    for (double r : rep.rms_at[s]) csv << ',' << g17(r);
    csv << '\n';
  }
  out.write(ctx.prefix + "representation.csv", csv.str());

  checks.push_back({"representation", "terminal_identity_decay", min_ratio(term), 1.3,
                    decays_or_exact(term, 1.3), "min RMS ratio per halving of the step"});
  checks.push_back({"representation", "representation_decay", min_ratio(rep.overall), 1.3,
                    decays_or_exact(rep.overall, 1.3), "at T/4, T/2, 3T/4 pooled"});
  checks.push_back({"representation", "zero_at_t0", rep.max_abs_at_zero, 0.0,
                    rep.max_abs_at_zero == 0.0, "max |LHS - RHS| at t = 0"});
  if (rep.jumps_seen > 0) {
    checks.push_back({"representation", "jump_term", rep.max_jump_error, 1e-10,
                      rep.max_jump_error <= 1e-10, "max |Delta rho - H| at jump times"});
  }

  if (ctx.sol.branch == StrategyBranch::PureJump) {
    Vector y0 = Vector::Zero(ctx.prep.sim.dim);
    if (ctx.prep.sim.jumps.kind() == JumpMeasure::Kind::Atoms) {
      y0 = ctx.prep.sim.jumps.atom_list().front().location;
    }
    const auto gc = compute_gamma_constants(ctx.prep.sim, ctx.spec, ctx.pair, y0);
    checks.push_back({"representation", "gamma_constants_fd", gc.discrepancy, 1e-6,
                      gc.discrepancy <= 1e-6, "analytic vs central differences"});
    const auto arb = arbitrate_scaling(ctx.sol, q, ctx.n_small, 1);
    std::ostringstream acsv;
    acsv << "label,coef,replication_rms,selected\n";
    for (std::size_t c = 0; c < arb.candidates.size(); ++c) {
      acsv << arb.candidates[c].label << ',' << g17(arb.candidates[c].coef[0]) << ','
           << g17(arb.candidates[c].rms) << ',' << (c == arb.selected ? 1 : 0) << '\n';
    }
    out.write(ctx.prefix + "arbiter.csv", acsv.str());
    const auto& sel = arb.candidates[arb.selected];
    const auto& other = arb.candidates[1 - arb.selected];
    const bool coincide = (sel.coef - other.coef).cwiseAbs().maxCoeff() <= 1e-12;
    const double bound = 1e-2 * std::max(1.0, std::abs(ctx.cfg.capital));
    const bool ok = sel.rms <= bound && (coincide || other.rms >= 10.0 * sel.rms);
    checks.push_back({"representation", "scaling_arbiter", sel.rms, bound, ok,
                      "selected " + sel.label + (coincide ? " (candidates coincide)" : "")});
  }
}

void preservation_suite(VerifyContext& ctx, std::vector<Check>& checks, Artifacts& out) {
  const auto& m = ctx.prep.model;
  const PathSimulator q(ctx.prep.sim, ctx.pair, m.spot, m.horizon, ctx.grid4, MeasureTag::Q,
                        ctx.cfg.seed + 2);
  const auto rep = levy_preservation_test(q, ctx.n, 4, 0.0);
  const auto ramp = levy_preservation_test(q, ctx.n, 4, 0.2);
  std::ostringstream csv;
  csv << "statistic,value,p_value_or_z\n"
      << "ks_first_vs_last," << g17(rep.stationarity.statistic) << ','
      << g17(rep.stationarity.p_value) << '\n'
      << "adjacent_correlation," << g17(rep.correlation) << ',' << g17(rep.correlation_p) << '\n'
      << "mean_increment," << g17(rep.mean_increment.mean) << ','
      << g17(rep.mean_increment.z_score) << '\n'
      << "var_increment," << g17(rep.var_increment.mean) << ','
      << g17(rep.var_increment.z_score) << '\n'
      << "ks_ramp_corrupted," << g17(ramp.stationarity.statistic) << ','
      << g17(ramp.stationarity.p_value) << '\n';
  out.write(ctx.prefix + "preservation.csv", csv.str());
  checks.push_back({"preservation", "stationarity", rep.stationarity.p_value, 0.01,
                    rep.stationarity.p_value > 0.01, "KS p-value, first vs last window"});
  checks.push_back({"preservation", "independence", rep.correlation_p, 0.01,
                    rep.correlation_p > 0.01, "Fisher-z p-value, adjacent windows"});
  checks.push_back({"preservation", "increment_mean", std::abs(rep.mean_increment.z_score), 3.0,
                    rep.mean_increment.within(3.0), "|z| against the Q-triplet mean"});
  checks.push_back({"preservation", "increment_variance", std::abs(rep.var_increment.z_score),
                    3.0, rep.var_increment.within(3.0), "|z| against the Q-triplet variance"});
  checks.push_back({"preservation", "ramp_detected", ramp.stationarity.p_value, 1e-4,
                    ramp.stationarity.p_value < 1e-4, "KS p-value with a 0.2 t^2 drift ramp"});
}

void dominance_suite(VerifyContext& ctx, std::vector<Check>& checks, Artifacts& out) {
  const auto& m = ctx.prep.model;
  const auto& sol = ctx.sol;
  const auto& spec = ctx.spec;
  const double T = m.horizon;
  const PathSimulator p(ctx.prep.sim, ctx.pair, m.spot, T, ctx.cfg.grid, MeasureTag::P,
                        ctx.cfg.seed + 3);
  Vector coef = sol.coef;
  if (sol.branch == StrategyBranch::PureJump) {
    const auto arb = arbitrate_scaling(sol, p, ctx.n_small, 1);
    coef = arb.candidates[arb.selected].coef;
  }
  StrategySolution used = sol;
  used.coef = coef;
  const double center = std::round(wealth_fraction(used, 0.0, 1.0, m.spot) * 20.0) / 20.0;
  std::vector<double> grid;
  for (int k = -20; k <= 20; ++k) grid.push_back(center + 0.05 * k);
  const auto tab = utility_dominance_scan(sol, p, grid, ctx.n, 1, &coef);

  std::ostringstream csv;
  csv << "label,proportion,admissible,mean_utility,std_error,paired_diff,paired_se,dominated\n";
  csv << "phi_hat,," << (tab.optimal.admissible ? 1 : 0) << ',' << g17(tab.optimal.utility.mean)
      << ',' << g17(tab.optimal.utility.std_error) << ",0,0,\n";
  for (const auto& r : tab.rows) {
    csv << r.label << ',' << g17(r.proportion) << ',' << (r.admissible ? 1 : 0) << ','
        << g17(r.utility.mean) << ',' << g17(r.utility.std_error) << ',' << g17(r.paired_diff)
        << ',' << g17(r.paired_se) << ',' << (r.dominated ? 1 : 0) << '\n';
  }
  out.write(ctx.prefix + "dominance.csv", csv.str());
  std::size_t beaten = 0;
  for (const auto& r : tab.rows) beaten += (r.admissible && !r.dominated) ? 1 : 0;
  checks.push_back({"dominance", "phi_hat_admissible", tab.optimal.admissible ? 1.0 : 0.0, 1.0,
                    tab.optimal.admissible, "V-hat above the wealth floor on every path"});
  checks.push_back({"dominance", "phi_hat_dominates", static_cast<double>(beaten), 0.0,
                    tab.all_dominated(), "grid strategies beating phi-hat by more than 3 SE"});

  // Without jumps and with log or power utility the optimum is a constant
  // fraction of wealth.
  const bool constant_fraction =
      ctx.prep.sim.jumps.empty() &&
      (spec.preset() == DivergencePreset::Log || spec.preset() == DivergencePreset::Power);
  if (constant_fraction) {
    const double b = ctx.prep.sim.drift[0];
    const double c = ctx.prep.sim.gauss(0, 0);
    const double p_exp = spec.power_p().value_or(0.0);
    const double merton = (b + 0.5 * c) / (c * (1.0 - p_exp));
    double dev = 0.0;
    for (std::uint64_t i = 0; i < ctx.n_small; ++i) {
      const auto path = p.path(i);
      for (std::size_t k = 0; k < path.nodes(); ++k) {
        Vector s(1);
        s[0] = path.s(k, 0);
        dev = std::max(dev, std::abs(wealth_fraction(sol, path.t[k], path.Z[k], s) - merton));
      }
    }
    checks.push_back({"dominance", "merton_fraction_constant", dev, 1e-8, dev <= 1e-8,
                      "max |pi_t - (b + c/2)/(c(1-p))| over nodes"});
    // The grid point nearest the Merton fraction must tie the grid maximum.
    const DominanceRow* near = nullptr;
    const DominanceRow* best = nullptr;
    for (const auto& r : tab.rows) {
      if (!r.admissible) continue;
      if (!near || std::abs(r.proportion - merton) < std::abs(near->proportion - merton)) near = &r;
      if (!best || r.utility.mean > best->utility.mean) best = &r;
    }
    double gap = 0.0;
    if (near && best && near != best) {
      gap = (near->paired_diff - best->paired_diff) / (near->paired_se + best->paired_se);
    }
    checks.push_back({"dominance", "argmax_at_merton", gap, 3.0, near && gap <= 3.0,
                      "utility gap between best (" + short_num(tab.best_proportion) +
                          ") and Merton grid point, in paired SE"});
  }

  if (spec.log_branch()) {
    const std::vector<double> levels{2.0, 4.0, 8.0, 16.0};
    const auto rows = truncation_study(sol, p, levels, ctx.n_small, 1);
    std::ostringstream tcsv;
    tcsv << "n,stopped_fraction,mean_utility,std_error\n";
    bool monotone = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      tcsv << g17(rows[k].n) << ',' << g17(rows[k].stopped_fraction) << ','
           << g17(rows[k].utility.mean) << ',' << g17(rows[k].utility.std_error) << '\n';
      if (k > 0) {
        const double drop = rows[k - 1].utility.mean - rows[k].utility.mean;
        const double band = 3.0 * std::max(rows[k].utility.std_error, rows[k - 1].utility.std_error);
        worst = std::max(worst, drop / std::max(band, 1e-300));
        if (drop > band) monotone = false;
      }
    }
    out.write(ctx.prefix + "truncation.csv", tcsv.str());
    checks.push_back({"dominance", "truncation_trend", worst, 1.0, monotone,
                      "largest utility drop as n grows, in units of 3 SE"});
  }
}

RunResult verify_run(const RunConfig& cfg, Artifacts& out) {
  static const std::vector<std::string> suites{"martingale", "representation", "preservation",
                                               "dominance"};
  if (cfg.suite != "all" && std::find(suites.begin(), suites.end(), cfg.suite) == suites.end()) {
    throw ConfigError("unknown suite '" + cfg.suite +
                      "' (martingale, representation, preservation, dominance, all)");
  }
  std::vector<ModelConfig> models;
  if (cfg.verify_models.empty()) {
    models.push_back(cfg.model);
  } else {
    for (const auto& name : cfg.verify_models) models.push_back(builtin_model(name));
  }

  std::vector<Check> all;
  json per_model = json::array();
  for (const auto& mc : models) {
    RunConfig local = cfg;
    local.model = mc;
    // Bundled runs use each model's own divergence unless one was given.
    if (!cfg.verify_models.empty() && cfg.raw.find("divergence") == cfg.raw.end()) {
      if (auto it = mc.defaults.find("divergence"); it != mc.defaults.end()) {
        local.divergence = DivergenceSpec::parse(it->second);
      }
    }
    auto prep = prepare(mc.model);
    auto pair = solve(prep.sim, local.divergence, local.tol);
    auto sol = make_strategy(prep.sim, local.divergence, pair, local.capital, mc.model.horizon);
    const std::uint64_t n = local.paths.value_or(10000);
    VerifyContext ctx{local,
                      std::move(prep),
                      local.divergence,
                      std::move(pair),
                      std::move(sol),
                      n,
                      std::min<std::uint64_t>(n, 1000),
                      round_up(local.grid, 4),
                      mc.model.name + "_"};
    std::vector<Check> checks;
    auto want = [&](const char* s) { return cfg.suite == "all" || cfg.suite == s; };
    if (want("martingale")) martingale_suite(ctx, checks, out);
    if (want("representation")) representation_suite(ctx, checks, out);
    if (want("preservation")) preservation_suite(ctx, checks, out);
    if (want("dominance")) dominance_suite(ctx, checks, out);
    json mj;
    mj["model"] = mc.model.name;
    mj["divergence"] = ctx.spec.name();
    mj["beta"] = vec_json(ctx.pair.beta);
    mj["lambda"] = ctx.sol.lambda;
    mj["coef"] = vec_json(ctx.sol.coef);
    mj["paths"] = n;
    json cj = json::array();
    for (const auto& c : checks) {
      cj.push_back({{"suite", c.suite}, {"check", c.name}, {"value", number_or_null(c.value)},
                    {"threshold", c.threshold}, {"passed", c.passed}, {"detail", c.detail}});
    }
    mj["checks"] = cj;
    per_model.push_back(mj);
    for (auto& c : checks) {
      c.detail = mc.model.name;
      all.push_back(c);
    }
  }

  std::ostringstream csv;
  csv << "model,suite,check,value,threshold,passed\n";
  std::ostringstream os;
  std::size_t failed = 0;
  for (const auto& c : all) {
    csv << c.detail << ',' << c.suite << ',' << c.name << ',' << g17(c.value) << ','
        << g17(c.threshold) << ',' << (c.passed ? 1 : 0) << '\n';
    char line[200];
    std::snprintf(line, sizeof line, "%-6s %-22s %-14s %-26s %12.4g  (limit %g)\n",
                  c.passed ? "PASS" : "FAIL", c.detail.c_str(), c.suite.c_str(), c.name.c_str(),
                  c.value, c.threshold);
    os << line;
    failed += c.passed ? 0 : 1;
  }
  out.write("verify_checks.csv", csv.str());
  json s;
  s["suite"] = cfg.suite;
  s["seed"] = cfg.seed;
  s["models"] = per_model;
  s["failed"] = failed;
  s["passed"] = failed == 0;
  out.write_json("verify_summary.json", s);
  RunResult r;
  r.text = os.str();
  r.text += failed == 0 ? "all checks passed\n" : std::to_string(failed) + " checks failed\n";
  r.status = failed == 0 ? 0 : 4;
  return r;
}

// ---- report -------------------------------------------------------------

void flatten(const json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    }
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t k = 0; k < j.size(); ++k) {
      flatten(j[k], prefix + "[" + std::to_string(k) + "]", os);
    }
  } else {
    os << prefix << " = " << j.dump() << "\n";
  }
}

RunResult report(const RunConfig& cfg, Artifacts& out) {
  std::vector<fs::path> summaries;
  for (const auto& e : fs::directory_iterator(out.dir())) {
    const auto name = e.path().filename().string();
    if (name.size() > 13 && name.substr(name.size() - 13) == "_summary.json") {
      summaries.push_back(e.path());
    }
  }
  std::sort(summaries.begin(), summaries.end());
  if (summaries.empty()) {
    throw ConfigError("report: no *_summary.json in '" + cfg.out_dir + "'");
  }
  std::ostringstream os;
  for (const auto& p : summaries) {
    std::ifstream in(p);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("report: cannot parse " + p.string() + ": " + e.what());
    }
    os << "== " << p.filename().string() << "\n";
    flatten(j, "", os);
    os << "\n";
  }
  out.write("report.txt", os.str());
  RunResult r;
  r.text = os.str();
  return r;
}

}  // namespace

RunResult run_command(const std::string& command, const RunConfig& cfg) {
  std::string cmd = command;
  std::replace(cmd.begin(), cmd.end(), '_', ' ');
  Artifacts out(cfg.out_dir);
  RunResult r;
  if (cmd == "model validate") {
    r = model_validate(cfg, out);
  } else if (cmd == "measure solve") {
    r = measure_solve(cfg, out);
  } else if (cmd == "simulate") {
    r = simulate(cfg, out);
  } else if (cmd == "strategy evaluate") {
    r = strategy_evaluate(cfg, out);
  } else if (cmd == "verify run") {
    r = verify_run(cfg, out);
  } else if (cmd == "report") {
    r = report(cfg, out);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  write_manifest(out, cmd, cfg, r.status);
  r.files = out.files();
  return r;
}

}  // namespace levyopt
