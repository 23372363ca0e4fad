// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [criterion numbers...]   (default: all ten)
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "igabem/harness.hpp"
#include "igabem/verify.hpp"

using namespace igabem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

// Folds a list of checks into one outcome; failing checks are listed first.
Outcome from_checks(const std::vector<Check>& checks) {
  Outcome o{true, ""};
  int failed = 0;
  std::ostringstream os;
  for (const Check& c : checks)
    if (!c.pass) {
      o.pass = false;
      os << (failed++ ? "; " : "failed: ") << c.name << " = " << fmt(c.value) << " (threshold " << fmt(c.threshold)
         << ")";
    }
  if (o.pass) os << checks.size() << " checks";
  o.detail = os.str();
  return o;
}

std::string levels_text(const ConvergenceReport& r) {
  std::ostringstream os;
  for (const LevelResult& l : r.levels) {
    os << " l" << l.level << '=' << fmt(l.error, 3);
    if (!l.failure.empty()) os << "(" << l.failure << ")";
  }
  return os.str();
}

bool all_levels_ok(const ConvergenceReport& r) {
  for (const LevelResult& l : r.levels)
    if (!l.failure.empty()) return false;
  return true;
}

StudyConfig study(int p, int first, int last) {
  StudyConfig cfg;
  cfg.degree = p;
  cfg.levels.clear();
  for (int l = first; l <= last; ++l) cfg.levels.push_back(l);
  return cfg;
}

// Criteria 1 and 2 share the p = 2 study; the finest run is probed while it is alive.
struct Studies {
  ConvergenceReport p1, p2;
  Vec3 probe = Vec3::Constant(std::nan(""));
  bool done = false;

  void run() {
    if (done) return;
    p1 = run_convergence_study(study(1, 0, 4));
    StudyConfig c2 = study(2, 0, 3);
    c2.on_level = [this](const BenchmarkRun& run, const LevelResult& l) {
      if (l.level == 3) probe = evaluate_exterior(run.bd, run.sys, run.sol, {Vec3(1.5, 0, 0)}).front();
    };
    p2 = run_convergence_study(c2);
    done = true;
  }
};

Outcome criterion1(Studies& s) {
  s.run();
  const bool ok1 = all_levels_ok(s.p1) && s.p1.rate >= 1.5 && s.p1.rate <= 2.5;
  const bool ok2 = all_levels_ok(s.p2) && s.p2.rate >= 3.3 && s.p2.rate <= 4.7;
  return {ok1 && ok2, "p=1 order " + fmt(s.p1.rate) + " in [1.5, 2.5]" + levels_text(s.p1) + "; p=2 order " +
                          fmt(s.p2.rate) + " in [3.3, 4.7]" + levels_text(s.p2)};
}

Outcome criterion2(Studies& s) {
  s.run();
  const Vec3 exact = magnetized_ball_solution(Vec3(1.5, 0, 0));
  const double rel = (s.probe - exact).norm() / exact.norm();
  std::ostringstream os;
  os << "u(1.5,0,0) = (" << fmt(s.probe.x(), 6) << ", " << fmt(s.probe.y(), 9) << ", " << fmt(s.probe.z(), 6)
     << "), exact y " << fmt(exact.y(), 9) << ", relative error " << fmt(rel, 3) << " <= 1e-3";
  return {rel <= 1e-3, os.str()};
}

// criteria 5 and 7 read from the same suite run
const std::vector<Check>& calderon_checks() {
  static const std::vector<Check> checks = verify_calderon();
  return checks;
}

Outcome criterion5() {
  std::vector<Check> picked;
  for (const Check& c : calderon_checks())
    if (c.name.find("contraction ratio") != std::string::npos || c.name.find("C_C0 in") != std::string::npos)
      picked.push_back(c);
  Outcome o = from_checks(picked);
  if (o.pass) {
    std::ostringstream os;
    for (const Check& c : picked) os << c.name << " = " << fmt(c.value) << "; ";
    o.detail = os.str() + o.detail;
  }
  return o;
}

Outcome criterion7() {
  std::vector<Check> picked;
  std::string detail;
  for (const Check& c : calderon_checks())
    if (c.name.find("residual decay") != std::string::npos) {
      picked.push_back(c);
      detail += c.name + " ratio " + fmt(c.value, 3) + " (" + c.detail + "); ";
    }
  Outcome o = from_checks(picked);
  o.detail = detail + o.detail;
  return o;
}

Outcome criterion8() {
  StudyConfig cfg;
  cfg.degree = 1;
  BenchmarkRun run = run_benchmark(cfg, 1, false);
  SolveOptions a;
  a.tol = 1e-10;
  SolveOptions b = a;
  b.gauge = GaugeStrategy::epsilon_regularization;
  const CoupledSolution sa = solve_linear(run.sys, a), sb = solve_linear(run.sys, b);
  const SpMat& C = run.vd.complex.d[1];
  const Vec ca = C * sa.u, cb = C * sb.u;
  const double dc = (ca - cb).norm() / std::max(ca.norm(), cb.norm());
  const double dp = (sa.phi - sb.phi).norm() / std::max(sa.phi.norm(), sb.phi.norm());
  return {dc <= 1e-5 && dp <= 1e-5,
          "relative difference curl u " + fmt(dc, 3) + ", phi " + fmt(dp, 3) + " (<= 1e-5), eps " + fmt(b.eps, 2)};
}

Outcome criterion9() {
  StudyConfig cfg;
  cfg.degree = 1;
  cfg.material = "saturation";
  BenchmarkRun run = run_benchmark(cfg, 1, false);
  const CoupledSolution s = solve_picard(run.data, run.vd, run.sys, cfg.solver);
  const double inc = s.increments.empty() ? std::nan("") : s.increments.back();
  const double res = nonlinear_residual(run.vd, run.data.model, run.sys, s.u, s.phi);
  const double res_tol = 1e-6 * (1.0 + run.sys.rhs().norm());

  // monotonicity and Lipschitz probes of the reluctivity on random curl pairs
  const int n2 = run.vd.complex.spaces[2].size();
  double worst_mono = 1e300, worst_lip = 0.0;
  std::srand(20240917);
  for (int t = 0; t < 10; ++t) {
    Vec a(n2), b(n2);
    const double scale = std::pow(10.0, -2.0 + 3.0 * t / 9.0);
    for (int i = 0; i < n2; ++i) {
      a[i] = scale * (2.0 * std::rand() / RAND_MAX - 1.0);
      b[i] = scale * (2.0 * std::rand() / RAND_MAX - 1.0);
    }
    const ReluctivityProbe pr = probe_reluctivity(run.vd, run.data.model, a, b);
    worst_mono = std::min(worst_mono, pr.inner / pr.diff2);
    worst_lip = std::max(worst_lip, std::sqrt(pr.response2 / pr.diff2));
  }
  // contraction constant on this boundary and the threshold C_M > C_C0 / 4
  const CalderonDiagnostics d = steklov_contraction_estimate(run.bd, assemble_operators(run.bd));
  const bool threshold = monotonicity_threshold(worst_mono, d);

  const bool ok = !s.increments.empty() && inc < 1e-8 && s.picard_iterations <= 50 && res <= res_tol &&
                  threshold && worst_lip <= run.data.model.lipschitz() * 1.05;
  std::ostringstream os;
  os << s.picard_iterations << " Picard iterations, last increment " << fmt(inc, 3) << " < 1e-8, nonlinear residual "
     << fmt(res, 3) << " <= " << fmt(res_tol, 3) << ", probed C_M " << fmt(worst_mono) << " > C_C0/4 = "
     << fmt(d.C_C0 / 4.0) << ", probed C_L " << fmt(worst_lip);
  return {ok, os.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Two consecutive CLI study runs per format, compared byte for byte.
Outcome criterion10(const std::string& cli) {
  std::string detail;
  bool ok = true;
  for (const std::string format : {"csv", "json"}) {
    std::string text[2];
    for (int k = 0; k < 2; ++k) {
      const std::string out = "acceptance_determinism_" + std::to_string(k) + "." + format;
      const std::string cmd =
          cli + " study --degree 1 --levels 0..1 --format " + format + " --out " + out + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
      text[k] = slurp(out);
      std::remove(out.c_str());
    }
    const bool same = !text[0].empty() && text[0] == text[1];
    ok = ok && same;
    detail += format + (same ? " identical (" + std::to_string(text[0].size()) + " bytes); " : " differs; ");
  }
  return {ok, detail + "two igabem study runs, p=1 l0-1"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > 10) {
      std::cerr << "usage: acceptance [1..10 ...]\n";
      return 2;
    }
    wanted.insert(k);
  }
  if (wanted.empty())
    for (int k = 1; k <= 10; ++k) wanted.insert(k);

  const std::string cli = (std::filesystem::path(argv[0]).parent_path() / "igabem").string();
  Studies studies;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exterior convergence rates", [&] { return criterion1(studies); }},
      {"exterior value at (1.5, 0, 0), p=2 l=3", [&] { return criterion2(studies); }},
      {"exact sequences and conformity", [] { return from_checks(verify_exactness(2)); }},
      {"operator structure, l <= 2", [] { return from_checks(verify_operators(2)); }},
      {"contraction diagnostic, l in {0, 1}", criterion5},
      {"shell potential 1/max(1, r)", [] { return from_checks(verify_potential()); }},
      {"Calderon residual decay", criterion7},
      {"gauge robustness, l=1 p=1", criterion8},
      {"Picard with saturation, l=1 p=1", criterion9},
      {"deterministic reports", [&] { return criterion10(cli); }},
  };

  int failed = 0;
  for (int k = 1; k <= 10; ++k) {
    if (!wanted.count(k)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[k - 1].first << "  ["
              << o.detail << "]  (" << fmt(sec, 3) << " s)" << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all passed")
            << std::endl;
  return failed ? 1 : 0;
}
