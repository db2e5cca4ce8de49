#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scqp/dual.hpp"
#include "scqp/infer.hpp"
#include "scqp/problems.hpp"
#include "scqp/relax.hpp"
#include "scqp/serialize.hpp"
#include "scqp/sion.hpp"
#include "scqp/verlan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scqp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitBudget = 3;
constexpr int kExitSuiteFailure = 4;

struct CliConfig {
  long seed = 12345;
  std::string out = ".";
  bool quiet = false;

  std::string problem = "fig2a";
  std::vector<long> set = {1, 2};
  long target = 3;
  long cells = 32;
  double dipole_pos = -0.5;

  // solver
  int max_iters = 10000;
  double grad_tol = 1e-8;
  bool resolve_kernel = true;

  // verlan
  double sigma = 0.5;
  double gamma = 0.5;
  double epsilon = 0.0;
  double boundary_tol = 1e-3;
  int scrape_limit = 25;
  double alpha_max = 0.0;  // 0 selects the model-derived default
  bool convex_mix = true;
  bool normalize_r = false;
  int max_solves = 400;

  // sion-scan
  int grid = 101;
  std::vector<double> span;  // x1_lo,x1_hi,x2_lo,x2_hi

  // check
  std::string suite = "all";
};

json config_to_json(const CliConfig& c) {
  return json{{"seed", c.seed},
              {"out", c.out},
              {"quiet", c.quiet},
              {"problem", c.problem},
              {"set", c.set},
              {"target", c.target},
              {"cells", c.cells},
              {"dipole_pos", c.dipole_pos},
              {"solver", json{{"max_iters", c.max_iters},
                              {"grad_tol", c.grad_tol},
                              {"resolve_kernel", c.resolve_kernel}}},
              {"verlan", json{{"sigma", c.sigma},
                              {"gamma", c.gamma},
                              {"epsilon", c.epsilon},
                              {"boundary_tol", c.boundary_tol},
                              {"scrape_limit", c.scrape_limit},
                              {"alpha_max", c.alpha_max},
                              {"convex_mix", c.convex_mix},
                              {"normalize_r", c.normalize_r},
                              {"max_solves", c.max_solves}}},
              {"sion_scan", json{{"grid", c.grid}, {"span", c.span}}},
              {"check", json{{"suite", c.suite}}}};
}

void config_from_json(const json& j, CliConfig& c) {
  c.seed = j.value("seed", c.seed);
  c.out = j.value("out", c.out);
  c.quiet = j.value("quiet", c.quiet);
  c.problem = j.value("problem", c.problem);
  if (j.contains("set")) c.set = j["set"].get<std::vector<long>>();
  c.target = j.value("target", c.target);
  c.cells = j.value("cells", c.cells);
  c.dipole_pos = j.value("dipole_pos", c.dipole_pos);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    c.max_iters = s.value("max_iters", c.max_iters);
    c.grad_tol = s.value("grad_tol", c.grad_tol);
    c.resolve_kernel = s.value("resolve_kernel", c.resolve_kernel);
  }
  if (j.contains("verlan")) {
    const json& v = j["verlan"];
    c.sigma = v.value("sigma", c.sigma);
    c.gamma = v.value("gamma", c.gamma);
    c.epsilon = v.value("epsilon", c.epsilon);
    c.boundary_tol = v.value("boundary_tol", c.boundary_tol);
    c.scrape_limit = v.value("scrape_limit", c.scrape_limit);
    c.alpha_max = v.value("alpha_max", c.alpha_max);
    c.convex_mix = v.value("convex_mix", c.convex_mix);
    c.normalize_r = v.value("normalize_r", c.normalize_r);
    c.max_solves = v.value("max_solves", c.max_solves);
  }
  if (j.contains("sion_scan")) {
    const json& s = j["sion_scan"];
    c.grid = s.value("grid", c.grid);
    if (s.contains("span")) c.span = s["span"].get<std::vector<double>>();
  }
  if (j.contains("check")) c.suite = j["check"].value("suite", c.suite);
}

SolverOptions solver_options(const CliConfig& c) {
  SolverOptions so;
  so.max_iters = c.max_iters;
  so.grad_tol = c.grad_tol;
  so.resolve_kernel = c.resolve_kernel;
  return so;
}

VerlanParams verlan_params(const CliConfig& c) {
  VerlanParams vp;
  vp.sigma = c.sigma;
  vp.gamma = c.gamma;
  vp.epsilon = c.epsilon;
  vp.boundary_tol = c.boundary_tol;
  vp.scrape_limit = c.scrape_limit;
  if (c.alpha_max > 0.0) vp.alpha_schedule = geometric_schedule(c.alpha_max);
  vp.convex_mix = c.convex_mix;
  vp.normalize_r = c.normalize_r;
  vp.max_solves = c.max_solves;
  vp.solver = solver_options(c);
  return vp;
}

SCQP resolve_problem(const CliConfig& c) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), c.problem) != names.end()) {
    BuiltinRequest req;
    req.name = c.problem;
    req.set = c.set;
    req.target = c.target;
    req.cells = c.cells;
    req.dipole_pos = c.dipole_pos;
    return load_builtin(req);
  }
  if (fs::exists(c.problem)) {
    std::ifstream in(c.problem);
    json j;
    in >> j;
    return scqp_from_json(j);
  }
  throw std::invalid_argument("unknown problem (not a builtin, not a readable JSON file): " +
                              c.problem);
}

fs::path out_path(const CliConfig& c, const std::string& file) {
  fs::create_directories(c.out);
  return fs::path(c.out) / file;
}

void echo_config(const CliConfig& c) {
  std::ofstream f(out_path(c, "run_config.json"));
  f << config_to_json(c).dump(2) << '\n';
}

void say(const CliConfig& c, const std::string& line) {
  if (!c.quiet) std::cout << line << '\n';
}

int cmd_solve_dual(const CliConfig& c) {
  echo_config(c);
  const SCQP p = resolve_problem(c);
  const DualResult dr = minimize_dual(p, solver_options(c));
  {
    std::ofstream f(out_path(c, "dual_result.json"));
    f << to_json(dr).dump(2) << '\n';
  }
  {
    std::ofstream f(out_path(c, "dual_history.csv"));
    write_history_csv(f, dr);
  }
  std::ostringstream line;
  line << p.label << ": dual value " << format_sci(dr.eval.value) << " converged "
       << dr.converged << " iterations " << dr.iterations;
  say(c, line.str());
  return dr.converged ? kExitOk : kExitNoConvergence;
}

int cmd_verlan(const CliConfig& c) {
  echo_config(c);
  const SCQP p = resolve_problem(c);
  const VerlanResult vr = run_verlan(p, verlan_params(c));
  {
    std::ofstream f(out_path(c, "verlan_trajectory.csv"));
    write_trajectory_csv(f, vr.state.history, p.objective.s);
  }
  {
    std::ofstream f(out_path(c, "verlan_summary.json"));
    f << to_json(vr).dump(2) << '\n';
  }
  if (vr.inferred.has_value()) {
    MaterialSet mat;
    if (p.scattering.has_value()) mat.chi_max = 1.0 / p.scattering->Xbul_inv(0, 0);
    std::ofstream f(out_path(c, "verlan_structure.csv"));
    write_structure_csv(f, *vr.inferred, mat);
  }
  std::ostringstream line;
  line << p.label << ": terminal " << vr.terminal << " solves " << vr.solves_used << " rho "
       << format_sci(vr.state.rho_cur) << " drift " << format_sci(vr.r_drift);
  if (!vr.diagnostics.empty()) line << " [" << vr.diagnostics << "]";
  say(c, line.str());
  return vr.terminal ? kExitOk : kExitBudget;
}

int cmd_sion_scan(const CliConfig& c) {
  echo_config(c);
  const SCQP p = resolve_problem(c);
  if (p.objective.dim() != 2) {
    throw std::invalid_argument("sion-scan supports 2-D problems only");
  }
  if (c.grid < 2) throw std::invalid_argument("sion-scan grid must be >= 2");
  double lo1, hi1, lo2, hi2;
  if (!c.span.empty()) {
    if (c.span.size() != 4) {
      throw std::invalid_argument("span must be x1_lo,x1_hi,x2_lo,x2_hi");
    }
    lo1 = c.span[0];
    hi1 = c.span[1];
    lo2 = c.span[2];
    hi2 = c.span[3];
    if (!(hi1 > lo1) || !(hi2 > lo2)) throw std::invalid_argument("empty span");
  } else {
    // Bounding box of the compactness ellipsoid, padded 20%.
    const QuadraticForm fk = kappa_form(p);
    const StationaryPoint sp = stationary_point(fk);
    const double w0 = eval(fk, sp.x);
    Eigen::SelfAdjointEigenSolver<CMat> es(fk.A);
    const double rmax = std::sqrt(std::max(w0, 0.0) / std::max(es.eigenvalues()(0), 1e-300));
    lo1 = sp.x(0).real() - 1.2 * rmax;
    hi1 = sp.x(0).real() + 1.2 * rmax;
    lo2 = sp.x(1).real() - 1.2 * rmax;
    hi2 = sp.x(1).real() + 1.2 * rmax;
  }
  const BScheduleReport sched = default_b_schedule(p);

  std::vector<SionScanRow> rows;
  rows.reserve(static_cast<size_t>(c.grid) * static_cast<size_t>(c.grid));
  for (int i = 0; i < c.grid; ++i) {
    const double x1 = lo1 + (hi1 - lo1) * i / (c.grid - 1);
    for (int j = 0; j < c.grid; ++j) {
      const double x2 = lo2 + (hi2 - lo2) * j / (c.grid - 1);
      SionScanRow row;
      row.x1 = x1;
      row.x2 = x2;
      const CVec x = (CVec(2) << x1, x2).finished();
      try {
        const SionSetReport rep = sion_membership(p, x, sched.b);
        row.member = rep.member;
        row.value = rep.plateau_value;
        row.divergence_rate = rep.divergence_rate;
      } catch (const std::exception&) {
        row.member = false;
        row.value = -std::numeric_limits<double>::infinity();
        row.divergence_rate = -std::numeric_limits<double>::infinity();
      }
      rows.push_back(row);
    }
  }
  {
    std::ofstream f(out_path(c, "sion_scan.csv"));
    write_sion_scan_csv(f, rows);
  }
  int members = 0;
  for (const SionScanRow& r : rows) members += r.member;
  std::ostringstream line;
  line << p.label << ": scanned " << rows.size() << " points, " << members << " members";
  say(c, line.str());
  return kExitOk;
}

int cmd_infer(const CliConfig& c) {
  echo_config(c);
  const SCQP p = resolve_problem(c);
  if (!p.scattering.has_value()) {
    throw std::invalid_argument("infer requires a problem with scattering structure");
  }
  const DualResult dr = minimize_dual(p, solver_options(c));
  MaterialSet mat;
  mat.chi_max = 1.0 / p.scattering->Xbul_inv(0, 0);
  const InferredStructure s = infer_structure(dr.eval.x_star, *p.scattering, mat);
  {
    std::ofstream f(out_path(c, "inferred.json"));
    json j = to_json(s);
    j["dual_value"] = dr.eval.value;
    j["converged"] = dr.converged;
    f << j.dump(2) << '\n';
  }
  {
    std::ofstream f(out_path(c, "structure.csv"));
    write_structure_csv(f, s, mat);
  }
  std::ostringstream line;
  line << p.label << ": resimulated objective " << format_sci(s.objective_resim)
       << " vs dual bound " << format_sci(dr.eval.value);
  say(c, line.str());
  return dr.converged ? kExitOk : kExitNoConvergence;
}

int cmd_sdp_check(const CliConfig& c) {
  echo_config(c);
  const SCQP p = resolve_problem(c);
  const EquivalenceReport rep = check_equivalence(p);
  {
    std::ofstream f(out_path(c, "sdp_check.json"));
    f << to_json(rep).dump(2) << '\n';
  }
  std::ostringstream line;
  line << p.label << ": dual " << format_sci(rep.dual_value) << " sdp "
       << format_sci(rep.sdp_value) << " gap " << format_sci(rep.gap) << " pass " << rep.pass;
  say(c, line.str());
  return rep.pass ? kExitOk : kExitNoConvergence;
}

// ---- property suites for `check` -------------------------------------------

struct SuiteResult {
  std::string name;
  int passed = 0;
  int total = 0;
  std::string detail;
  bool ok() const { return passed == total; }
};

SuiteResult suite_lemma4(long seed) {
  SuiteResult sr;
  sr.name = "lemma4";
  std::mt19937_64 rng(static_cast<uint64_t>(seed));
  for (int i = 0; i < 50; ++i) {
    const SCQP p = random_scqp(rng);
    // The violation cap applies to the minimum-norm Lagrangian maximizer, so
    // kernel resolution stays off; slack follows the solver's stationarity
    // scale 1 + |D|.
    SolverOptions so;
    so.resolve_kernel = false;
    const DualResult dr = minimize_dual(p, so);
    const RVec res = residuals(p, dr.eval.x_star);
    const RVec bound = lemma_feasibility_bounds(p, dr.eval.x_star);
    bool ok = true;
    for (Eigen::Index j = 0; j < res.size(); ++j) {
      const double slack = 1e-6 * (1.0 + std::abs(dr.eval.value) + std::abs(bound(j)));
      if (res(j) < -(bound(j) + slack)) ok = false;
    }
    sr.passed += ok;
    ++sr.total;
    if (!ok && sr.detail.empty()) sr.detail = "instance " + std::to_string(i);
  }
  return sr;
}

SuiteResult suite_sdp(long seed) {
  SuiteResult sr;
  sr.name = "sdp";
  std::mt19937_64 rng(static_cast<uint64_t>(seed) + 1);
  for (int i = 0; i < 20; ++i) {
    const SCQP p = random_scqp(rng, 3, 4);
    const EquivalenceReport rep = check_equivalence(p);
    sr.passed += rep.pass;
    ++sr.total;
    if (!rep.pass && sr.detail.empty()) {
      sr.detail = "instance " + std::to_string(i) + " gap " + format_sci(rep.gap);
    }
  }
  return sr;
}

SuiteResult suite_sion(long seed) {
  SuiteResult sr;
  sr.name = "sion";
  std::mt19937_64 rng(static_cast<uint64_t>(seed) + 2);
  for (int i = 0; i < 25; ++i) {
    const SCQP p = random_scqp(rng, 3, 5);
    bool ok = false;
    try {
      const SionProgramResult spr = solve_sion_program(p);
      const BScheduleReport sched = default_b_schedule(p);
      const SionSetReport rep = sion_membership(p, spr.x_tilde, sched.b);
      // Allowance grows with the first bound: noise in the maximizer feeds
      // the plateau value proportionally to b.
      const double tol = 1e-5 * (1.0 + std::abs(spr.value)) + 1e-6 * sched.b.front();
      ok = rep.member && std::abs(rep.plateau_value - spr.value) <= tol;
    } catch (const std::exception&) {
      ok = false;
    }
    sr.passed += ok;
    ++sr.total;
    if (!ok && sr.detail.empty()) sr.detail = "instance " + std::to_string(i);
  }
  return sr;
}

SuiteResult suite_scrape(long seed) {
  SuiteResult sr;
  sr.name = "scrape";
  std::mt19937_64 rng(static_cast<uint64_t>(seed) + 3);
  for (int i = 0; i < 25; ++i) {
    const SCQP p = random_scqp(rng);
    // Degenerate solves are exempt: a near-singular composite leaves the
    // maximizer face ambiguous and the magnitude guarantee does not apply.
    const double cut = 1e-5 * kappa_form(p).A.norm();
    VerlanParams vp;
    vp.convex_mix = false;
    vp.sigma = 0.3;
    vp.gamma = 0.3;
    vp.boundary_tol = 1e-9;
    vp.scrape_limit = 8;
    vp.max_solves = 60;
    bool ok = true;
    try {
      const VerlanResult vr = run_verlan(p, vp);
      double prev = -1.0;
      double prev_eig = 0.0;
      bool in_run = false;
      for (const VerlanRecord& rec : vr.state.history) {
        if (rec.step_kind == StepKind::SCRAPE) {
          if (in_run && prev_eig > cut && rec.min_eig > cut &&
              rec.x_norm < prev - 1e-6 * (1.0 + rec.x_norm)) {
            ok = false;
          }
          prev = rec.x_norm;
          prev_eig = rec.min_eig;
          in_run = true;
        } else {
          in_run = false;
        }
      }
    } catch (const std::logic_error&) {
      ok = false;  // monotonicity assertion tripped
    }
    sr.passed += ok;
    ++sr.total;
    if (!ok && sr.detail.empty()) sr.detail = "instance " + std::to_string(i);
  }
  return sr;
}

SuiteResult suite_weak(long seed) {
  SuiteResult sr;
  sr.name = "weak";
  auto check_pair = [&](double dual, double primal) {
    sr.passed += (dual >= primal - 1e-6);
    ++sr.total;
  };
  {
    const SCQP p = load_builtin("ball");
    check_pair(minimize_dual(p).eval.value, brute_force_primal_grid(p).value);
  }
  {
    const SCQP p = load_builtin("fig2a");
    check_pair(minimize_dual(p).eval.value, brute_force_primal_grid(p).value);
  }
  {
    const SCQP p = load_builtin("subset-sum");
    check_pair(minimize_dual(p).eval.value, brute_force_primal_binary(p).value);
  }
  std::mt19937_64 rng(static_cast<uint64_t>(seed) + 4);
  for (int i = 0; i < 10; ++i) {
    const SCQP p = random_scqp(rng, 3, 4);
    const PrimalResult pr = brute_force_primal_grid(p);
    if (!pr.found) {
      ++sr.passed;  // nothing to compare on an empty real slice
      ++sr.total;
      continue;
    }
    check_pair(minimize_dual(p).eval.value, pr.value);
  }
  return sr;
}

int cmd_check(const CliConfig& c) {
  echo_config(c);
  std::vector<SuiteResult> results;
  const std::string& s = c.suite;
  const bool all = (s == "all");
  if (all || s == "lemma4") results.push_back(suite_lemma4(c.seed));
  if (all || s == "sdp") results.push_back(suite_sdp(c.seed));
  if (all || s == "sion") results.push_back(suite_sion(c.seed));
  if (all || s == "scrape") results.push_back(suite_scrape(c.seed));
  if (all || s == "weak") results.push_back(suite_weak(c.seed));
  if (results.empty()) throw std::invalid_argument("unknown suite: " + s);

  bool any_fail = false;
  std::printf("%-10s %8s %8s  %s\n", "suite", "passed", "total", "detail");
  for (const SuiteResult& r : results) {
    std::printf("%-10s %8d %8d  %s\n", r.name.c_str(), r.passed, r.total,
                r.ok() ? "ok" : r.detail.c_str());
    any_fail = any_fail || !r.ok();
  }
  return any_fail ? kExitSuiteFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig cfg;
  // --config is honored before flag parsing so flags override file values.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        std::ifstream in(argv[i + 1]);
        if (!in) throw std::invalid_argument("cannot open config file");
        json j;
        in >> j;
        config_from_json(j, cfg);
      } catch (const std::exception& e) {
        std::cerr << "error: bad config " << argv[i + 1] << ": " << e.what() << '\n';
        return kExitBadConfig;
      }
    }
  }

  CLI::App app{"Scattering-constrained quadratic programs: duals, Sion sets, "
               "verlan protocols, and structure inference"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags remain valid after the subcommand name
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--seed", cfg.seed, "seed for randomized suites");
  app.add_option("--out", cfg.out, "output directory");
  app.add_flag("--quiet", cfg.quiet, "suppress summary lines");

  auto add_problem_opts = [&](CLI::App* cmd) {
    cmd->add_option("--problem", cfg.problem,
                    "builtin name (ball, fig2a, subset-sum, helmholtz1d) or JSON path");
    cmd->add_option("--set", cfg.set, "subset-sum elements")->delimiter(',');
    cmd->add_option("--target", cfg.target, "subset-sum target");
    cmd->add_option("--cells", cfg.cells, "helmholtz1d cell count");
    cmd->add_option("--dipole-pos", cfg.dipole_pos, "helmholtz1d source position");
  };
  auto add_solver_opts = [&](CLI::App* cmd) {
    cmd->add_option("--max-iters", cfg.max_iters, "projected-gradient iteration cap");
    cmd->add_option("--grad-tol", cfg.grad_tol, "projected-gradient tolerance");
    cmd->add_flag("!--no-resolve-kernel", cfg.resolve_kernel,
                  "skip kernel resolution of the reported maximizer");
  };

  CLI::App* sd = app.add_subcommand("solve-dual", "minimize the Lagrange dual");
  add_problem_opts(sd);
  add_solver_opts(sd);

  CLI::App* vl = app.add_subcommand("verlan", "run the contract/expand/scrape protocol");
  add_problem_opts(vl);
  add_solver_opts(vl);
  vl->add_option("--sigma", cfg.sigma, "scrape rate at the boundary");
  vl->add_option("--gamma", cfg.gamma, "scrape rate off the boundary");
  vl->add_option("--epsilon", cfg.epsilon, "expansion step (0 = alpha_max/8)");
  vl->add_option("--boundary-tol", cfg.boundary_tol, "strong-duality tolerance on rho");
  vl->add_option("--scrape-limit", cfg.scrape_limit, "scrapes per level");
  vl->add_option("--alpha-max", cfg.alpha_max, "largest contraction level (0 = default)");
  vl->add_flag("--convex-mix,!--no-convex-mix", cfg.convex_mix, "convex r update");
  vl->add_flag("--normalize-r", cfg.normalize_r, "rescale r after each mix");
  vl->add_option("--max-solves", cfg.max_solves, "dual-solve budget");

  CLI::App* sc = app.add_subcommand("sion-scan", "grid scan of the bounded Sion function (2-D)");
  add_problem_opts(sc);
  sc->add_option("--grid", cfg.grid, "points per axis");
  sc->add_option("--span", cfg.span, "x1_lo,x1_hi,x2_lo,x2_hi")->delimiter(',');

  CLI::App* in = app.add_subcommand("infer", "solve the dual and infer a structure");
  add_problem_opts(in);
  add_solver_opts(in);

  CLI::App* sp = app.add_subcommand("sdp-check", "dual vs semidefinite relaxation");
  add_problem_opts(sp);

  CLI::App* ck = app.add_subcommand("check", "randomized property suites");
  ck->add_option("--suite", cfg.suite, "all, lemma4, sdp, sion, scrape, weak");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitBadConfig;
  }

  try {
    if (sd->parsed()) return cmd_solve_dual(cfg);
    if (vl->parsed()) return cmd_verlan(cfg);
    if (sc->parsed()) return cmd_sion_scan(cfg);
    if (in->parsed()) return cmd_infer(cfg);
    if (sp->parsed()) return cmd_sdp_check(cfg);
    if (ck->parsed()) return cmd_check(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  }
  return kExitBadConfig;
}
