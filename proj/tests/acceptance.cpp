#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "app/config.hpp"
#include "app/run.hpp"
#include "core/errors.hpp"
#include "verify/verification.hpp"

using namespace levyopt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ") + what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Setup {
  MarketModel model;
  LevyTriplet triplet;
  DivergenceSpec spec;
};

Setup setup(const std::string& name, const std::string& divergence = "") {
  const auto mc = builtin_model(name);
  const std::string d = divergence.empty() ? mc.defaults.at("divergence") : divergence;
  return {mc.model, discounted_triplet(mc.model), DivergenceSpec::parse(d)};
}

double wealth_fraction(const StrategySolution& sol, const Vector& coef, double t, double z,
                       const Vector& s) {
  const Vector phi = strategy_with_coef(sol, coef, t, z, s);
  return phi.cwiseProduct(s)[0] / -solution_rho(sol, t, z);
}

std::vector<double> centred_grid(double centre) {
  const double c = std::round(centre * 20.0) / 20.0;
  std::vector<double> g;
  for (int k = -20; k <= 20; ++k) g.push_back(c + 0.05 * k);
  return g;
}

Outcome solver_exactness() {
  Outcome o;
  const auto s = setup("black_scholes", "log");
  const auto pair = solve_beta(s.triplet, s.spec);
  const double err = std::abs(pair.beta[0] + 1.75);
  o.require(err <= 1e-10, "|beta + 1.75| = " + num(err) + " <= 1e-10");
  ComplexVector u(1);
  u[0] = std::complex<double>(0.0, -1.0);
  const double drift = std::abs(levy_exponent(q_triplet(s.triplet, pair), u));
  o.require(drift <= 1e-10, "|psi_Q(-i)| = " + num(drift));
  return o;
}

Outcome lambda_calibration() {
  Outcome o;
  const auto s = setup("black_scholes", "log");
  const auto pair = solve_beta(s.triplet, s.spec);
  const auto sol = make_strategy(s.triplet, s.spec, pair, 2.0, s.model.horizon);
  o.require(sol.lambda == 0.5, "lambda = " + num(sol.lambda));
  const PathSimulator q(s.triplet, pair, s.model.spot, s.model.horizon, 1, MeasureTag::Q, 1001);
  const auto e = mc_expectation(
      q, 100000, [&](const SimulatedPath& p) { return -s.spec.fprime(sol.lambda * p.Z[p.last()]); },
      2.0);
  o.require(e.within(3.0), "E_Q[-f'(lambda Z_T)] = " + num(e.mean) + " (z " + num(e.z_score) + ")");
  return o;
}

Outcome merton_proportion() {
  Outcome o;
  const auto s = setup("black_scholes", "log");
  const auto pair = solve_beta(s.triplet, s.spec);
  const auto sol = make_strategy(s.triplet, s.spec, pair, 1.0, s.model.horizon);
  const double b = s.triplet.drift[0], c = s.triplet.gauss(0, 0);
  const double merton = (b + 0.5 * c) / c;
  const PathSimulator p(s.triplet, pair, s.model.spot, s.model.horizon, 100, MeasureTag::P, 1002);
  double dev = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto path = p.path(i);
    for (std::size_t k = 0; k < path.nodes(); ++k) {
      Vector sp(1);
      sp[0] = path.s(k, 0);
      dev = std::max(dev, std::abs(wealth_fraction(sol, sol.coef, path.t[k], path.Z[k], sp) - merton));
    }
  }
  o.require(dev <= 1e-8, "max |pi - " + num(merton) + "| = " + num(dev));
  const auto tab = utility_dominance_scan(sol, p, centred_grid(merton), 10000);
  std::size_t beaten = 0;
  for (const auto& r : tab.rows) beaten += (r.admissible && !r.dominated) ? 1 : 0;
  o.require(tab.rows.size() == 41 && tab.all_dominated(),
            "phi-hat dominates 41 proportions (" + std::to_string(beaten) + " beat it)");
  return o;
}

struct Refinement {
  RefinementStudy terminal;
  RepresentationReport representation;
};

Refinement refine(const std::string& name, const std::string& divergence, std::uint64_t seed) {
  const auto s = setup(name, divergence);
  const auto pair = solve_beta(s.triplet, s.spec);
  const auto sol = make_strategy(s.triplet, s.spec, pair, 1.0, s.model.horizon);
  const PathSimulator q(s.triplet, pair, s.model.spot, s.model.horizon, 400, MeasureTag::Q, seed);
  const std::vector<int> strides{4, 2, 1};
  const double T = s.model.horizon;
  return {terminal_identity_study(sol, q, 1000, strides),
          representation_residual(sol, q, 1000, strides, {0.25 * T, 0.5 * T, 0.75 * T})};
}

bool exact(const RefinementStudy& st) {
  for (double r : st.rms)
    if (r > 1e-9) return false;
  return true;
}

bool decays_or_exact(const RefinementStudy& st) { return exact(st) || st.decays(1.3); }

std::string ratios(const RefinementStudy& st) {
  if (exact(st)) return "exact to rounding (max rms " + num(*std::max_element(st.rms.begin(), st.rms.end())) + ")";
  std::string out;
  for (double r : st.ratios()) out += (out.empty() ? "" : ", ") + num(r);
  return "ratios " + out;
}

struct Refinements {
  Refinement bs, mj, mj_log;
};

Outcome terminal_identity(const Refinements& r) {
  Outcome o;
  o.require(r.bs.terminal.decays(1.3), "black_scholes " + ratios(r.bs.terminal));
  o.require(decays_or_exact(r.mj.terminal), "merton_jump " + ratios(r.mj.terminal));
  o.require(r.mj_log.terminal.decays(1.3), "merton_jump/log " + ratios(r.mj_log.terminal));
  return o;
}

Outcome representation(const Refinements& r) {
  Outcome o;
  o.require(r.bs.representation.overall.decays(1.3), "black_scholes " + ratios(r.bs.representation.overall));
  o.require(decays_or_exact(r.mj.representation.overall),
            "merton_jump " + ratios(r.mj.representation.overall));
  o.require(r.mj_log.representation.overall.decays(1.3),
            "merton_jump/log " + ratios(r.mj_log.representation.overall));
  bool zero = true;
  for (const auto* x : {&r.bs, &r.mj, &r.mj_log}) zero = zero && x->representation.max_abs_at_zero == 0.0;
  o.require(zero, "exact zero at t = 0");
  return o;
}

Outcome moment_curve() {
  Outcome o;
  std::uint64_t seed = 1006;
  for (const char* d : {"log", "exponential", "power:0.5"}) {
    const auto s = setup("merton_jump", d);
    const auto pair = solve_beta(s.triplet, s.spec);
    const DensityMomentCurve curve(s.triplet, pair.ratio, MeasureTag::Q);
    const double k0 = std::abs(curve.kappa(0.0)), km1 = std::abs(curve.kappa(-1.0));
    o.require(k0 <= 1e-12 && km1 <= 1e-12, std::string(d) + " kappa_Q(0), kappa_Q(-1) <= " +
                                               num(std::max(k0, km1)));
    const double g1 = s.spec.gamma() + 1.0;
    const PathSimulator q(s.triplet, pair, s.model.spot, s.model.horizon, 1, MeasureTag::Q, seed++);
    const auto e = mc_expectation(
        q, 100000, [&](const SimulatedPath& p) { return std::pow(p.Z[p.last()], g1); },
        std::exp(s.model.horizon * curve.kappa(g1)));
    o.require(e.within(3.0), std::string(d) + " z " + num(e.z_score));
  }
  return o;
}

Outcome pure_jump() {
  Outcome o;
  const auto s = setup("single_atom_pure_jump");
  const auto pair = solve_beta(s.triplet, s.spec);
  const auto sol = make_strategy(s.triplet, s.spec, pair, 1.0, s.model.horizon);
  o.require(sol.branch == StrategyBranch::PureJump, "pure-jump branch");
  const Vector y0 = s.triplet.jumps.atom_list().front().location;
  const auto gc = compute_gamma_constants(s.triplet, s.spec, pair, y0);
  o.require(gc.discrepancy <= 1e-6, "gamma analytic vs FD " + num(gc.discrepancy));

  const PathSimulator q(s.triplet, pair, s.model.spot, s.model.horizon, 100, MeasureTag::Q, 1007);
  const auto arb = arbitrate_scaling(sol, q, 1000);
  const auto& sel = arb.candidates[arb.selected];
  const auto& other = arb.candidates[1 - arb.selected];
  const bool coincide = (sel.coef - other.coef).cwiseAbs().maxCoeff() <= 1e-12;
  o.require(sel.rms <= 1e-2 && (coincide || other.rms >= 10.0 * sel.rms),
            "arbiter selects " + sel.label + " (rms " + num(sel.rms) + " vs " + num(other.rms) + ")");

  const PathSimulator p(s.triplet, pair, s.model.spot, s.model.horizon, 100, MeasureTag::P, 1008);
  const double centre = wealth_fraction(sol, sel.coef, 0.0, 1.0, s.model.spot);
  const auto tab = utility_dominance_scan(sol, p, centred_grid(centre), 10000, 1, &sel.coef);
  o.require(tab.optimal.admissible && tab.all_dominated(), "selected phi-hat dominates 41 proportions");
  return o;
}

Outcome diagnostics() {
  Outcome o;
  for (const auto& [name, kind] : {std::pair{"cdsec1_violation", SolverFailure::Positivity},
                                   std::pair{"cdsec2_divergent", SolverFailure::Integrability}}) {
    const auto s = setup(name);
    try {
      solve_beta(s.triplet, s.spec);
      o.require(false, std::string(name) + " raises a solver error");
    } catch (const SolverError& e) {
      o.require(e.kind() == kind, std::string(name) + " raises a solver error of the right kind");
    }
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism(const fs::path& scratch) {
  Outcome o;
  std::map<std::string, std::string> keys{{"suite", "all"}, {"seed", "424242"}};
  const fs::path a = scratch / "run_a", b = scratch / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  keys["out"] = a.string();
  const auto ra = run_command("verify run", resolve_run_config(keys));
  keys["out"] = b.string();
  const auto rb = run_command("verify run", resolve_run_config(keys));
  int csvs = 0, same = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++csvs;
    same += slurp(e.path()) == slurp(b / e.path().filename()) ? 1 : 0;
  }
  o.require(csvs > 0 && same == csvs, std::to_string(same) + "/" + std::to_string(csvs) +
                                          " CSV files byte-identical");
  o.require(ra.status == rb.status, "equal exit status (" + std::to_string(ra.status) + ")");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "levyopt_acceptance";
  fs::create_directories(scratch);
  int failed = 0;
  auto report = [&](int id, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0.0) o.require(secs < limit_s, num(secs) + " s < " + num(limit_s) + " s");
    failed += o.passed ? 0 : 1;
    std::printf("%s criterion %d: %s\n", o.passed ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, 1.0, solver_exactness);
  report(2, 30.0, lambda_calibration);
  report(3, 120.0, merton_proportion);
  Refinements ref;
  report(4, 0.0, [&] {
    ref.bs = refine("black_scholes", "log", 1004);
    ref.mj = refine("merton_jump", "", 1005);
    ref.mj_log = refine("merton_jump", "log", 1009);
    return terminal_identity(ref);
  });
  report(5, 0.0, [&] { return representation(ref); });
  report(6, 0.0, moment_curve);
  report(7, 0.0, pure_jump);
  report(8, 0.0, diagnostics);
  report(9, 0.0, [&] { return determinism(scratch); });
  return failed == 0 ? 0 : 1;
}
