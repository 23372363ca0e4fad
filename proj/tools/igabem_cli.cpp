// igabem command line: solve, study, verify.
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "igabem/config.hpp"
#include "igabem/harness.hpp"
#include "igabem/verify.hpp"

using namespace igabem;

namespace {

// Options shared by solve and study. Every flag is forwarded as a config key
// so that flags given on the command line override the file.
struct CommonFlags {
  std::string config, geometry, material, out, format, dump, log, gauge;
  int degree = 1;
  double tol = 0.0;
  int threads = 0;
  bool nondeterministic = false;

  void add(CLI::App* app) {
    app->add_option("--config", config, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--geometry", geometry, "geometry tag (ball)");
    app->add_option("--degree", degree, "spline degree p");
    app->add_option("--material", material, "identity | saturation");
    app->add_option("--out", out, "report path");
    app->add_option("--format", format, "csv | json");
    app->add_option("--gauge", gauge, "consistent-krylov | epsilon-regularization");
    app->add_option("--tol", tol, "relative solver tolerance");
    app->add_option("--threads", threads, "assembly threads (0 = all cores)");
    app->add_option("--dump-operators", dump, "write operator matrices into this directory");
    app->add_option("--log-iterations", log, "write solver iteration history (CSV)");
    app->add_flag("--nondeterministic", nondeterministic, "record wall times in reports");
  }

  KeyValues collect(CLI::App* app) const {
    KeyValues kv;
    if (!config.empty()) kv = parse_config_file(config);
    auto given = [&](const char* flag) { return app->count(flag) > 0; };
    if (given("--geometry")) kv["geometry"] = geometry;
    if (given("--degree")) kv["degree"] = std::to_string(degree);
    if (given("--material")) kv["material"] = material;
    if (given("--out")) kv["out"] = out;
    if (given("--format")) kv["format"] = format;
    if (given("--gauge")) kv["solver.gauge"] = gauge;
    if (given("--threads")) kv["threads"] = std::to_string(threads);
    if (given("--dump-operators")) kv["dump_operators"] = dump;
    if (given("--log-iterations")) kv["log_iterations"] = log;
    if (given("--nondeterministic")) kv["deterministic"] = "false";
    if (given("--tol")) {
      std::ostringstream os;
      os << std::setprecision(17) << tol;
      kv["solver.tol"] = os.str();
    }
    return kv;
  }
};

void write_or_print(const ConvergenceReport& rep, const StudyConfig& cfg) {
  if (cfg.out.empty())
    std::cout << (cfg.format == "json" ? report_json(rep) : report_csv(rep));
  else
    emit_report(rep, cfg.out, cfg.format);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isogeometric FEM-BEM coupling for 3D magnetostatics"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  int level = 0;
  auto* solve = app.add_subcommand("solve", "solve the magnetized-ball benchmark on one level");
  solve_flags.add(solve);
  solve->add_option("--level", level, "refinement level");

  CommonFlags study_flags;
  std::string levels, radius, npoints;
  auto* study = app.add_subcommand("study", "convergence study of the exterior solution");
  study_flags.add(study);
  study->add_option("--levels", levels, "level range A..B");
  study->add_option("--radius", radius, "evaluation sphere radius");
  study->add_option("--npoints", npoints, "number of evaluation points");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run the property suites");
  verify->add_option("--suite", suite, "exactness | operators | potential | calderon | all")
      ->check(CLI::IsMember({"exactness", "operators", "potential", "calderon", "all"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) {
      const bool ok = print_checks(std::cout, run_verify_suite(suite));
      std::cout << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
      return ok ? 0 : 1;
    }

    StudyConfig cfg;
    if (*solve) {
      KeyValues kv = solve_flags.collect(solve);
      if (solve->count("--level")) kv["level"] = std::to_string(level);
      apply_config(kv, cfg);
      if (cfg.levels.size() != 1) throw std::invalid_argument("solve takes a single --level");
      cfg.validate();
      BenchmarkRun run = run_benchmark(cfg, cfg.levels.front());
      const Vec dir = run.sys.trace * run.sol.u - run.sys.u0;
      const Vec neu = run.bd.solenoidal.Z * run.sol.phi;
      double err = 0.0;
      for (const Vec3& x : fibonacci_sphere(cfg.npoints, cfg.radius, cfg.seed))
        err = std::max(err, (eval_representation(run.bd, x, dir, neu, Side::exterior) -
                             magnetized_ball_solution(x, cfg.magnetization))
                                .norm());
      const Vec3 probe(cfg.radius, 0.0, 0.0);
      const Vec3 v = eval_representation(run.bd, probe, dir, neu, Side::exterior);
      std::cout << std::setprecision(10);
      std::cout << "degree " << cfg.degree << " level " << cfg.levels.front() << " material " << cfg.material << '\n'
                << "dofs volume " << run.vd.complex.spaces[1].size() << " boundary " << run.bd.solenoidal.size()
                << '\n'
                << "krylov iterations " << run.sol.iterations << " picard iterations " << run.sol.picard_iterations
                << " residual " << run.sol.residual << '\n'
                << "max exterior error on " << cfg.npoints << " points: " << err << '\n'
                << "u at (" << probe.transpose() << "): " << v.transpose() << "  exact "
                << magnetized_ball_solution(probe, cfg.magnetization).transpose() << '\n';
      if (cfg.material == "identity") std::cout << "curl L2 error " << curl_l2_error(run, cfg.magnetization) << '\n';
      if (!cfg.out.empty()) {
        ConvergenceReport rep;
        rep.degree = cfg.degree;
        rep.config = cfg.echo();
        rep.rate = rep.rate_stderr = rep.curl_rate = std::numeric_limits<double>::quiet_NaN();
        LevelResult lr;
        lr.level = cfg.levels.front();
        lr.h = std::ldexp(1.0, -lr.level);
        lr.dofs_volume = run.vd.complex.spaces[1].size();
        lr.dofs_bem = run.bd.solenoidal.size();
        lr.error = err;
        lr.per_step_rate = std::numeric_limits<double>::quiet_NaN();
        lr.iterations = run.sol.iterations;
        rep.levels.push_back(lr);
        emit_report(rep, cfg.out, cfg.format);
      }
      return 0;
    }

    KeyValues kv = study_flags.collect(study);
    if (study->count("--levels")) kv["levels"] = levels;
    if (study->count("--radius")) kv["radius"] = radius;
    if (study->count("--npoints")) kv["npoints"] = npoints;
    apply_config(kv, cfg);
    cfg.validate();
    cfg.on_level = [](const BenchmarkRun&, const LevelResult& l) {
      std::cerr << "level " << l.level << ": error " << l.error << ", " << l.iterations << " iterations\n";
    };
    const ConvergenceReport rep = run_convergence_study(cfg);
    write_or_print(rep, cfg);
    std::cerr << "fitted order " << rep.rate << " +- " << rep.rate_stderr << '\n';
    for (const auto& l : rep.levels)
      if (!l.failure.empty()) {
        std::cerr << "level " << l.level << " failed: " << l.failure << '\n';
        return 2;
      }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
