#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "igabem/bem.hpp"
#include "igabem/fem.hpp"
#include "igabem/solver.hpp"

namespace igabem {

// Uniformly magnetized unit ball with magnetization m: u = m x x / 3 inside and
// m x x / (3 |x|^3) outside; for m = e3 only the azimuthal component is nonzero.
Vec3 magnetized_ball_solution(const Vec3& x, const Vec3& m = Vec3(0, 0, 1));
Vec3 magnetized_ball_curl(const Vec3& x, const Vec3& m = Vec3(0, 0, 1));
// Exterior traces on the unit sphere: curl u x n = n x m / 3.
Vec3 magnetized_ball_neumann(const Vec3& x, const Vec3& m = Vec3(0, 0, 1));

// Fibonacci lattice of n points on the sphere of the given radius; the seed
// rotates the lattice about the polar axis.
std::vector<Vec3> fibonacci_sphere(int n, double radius, unsigned seed = 0);

struct BenchmarkRun;
struct LevelResult;

struct StudyConfig {
  StudyConfig() { solver.tol = 1e-10; }  // studies resolve errors far below the linear default

  std::string geometry = "ball";
  double inner_half_width = 0.4;
  int degree = 1;
  std::vector<int> levels{0, 1, 2};
  double radius = 1.5;
  int npoints = 20;
  unsigned seed = 0;
  Vec3 magnetization = Vec3(0, 0, 1);
  std::string material = "identity";
  double nu_min = 0.5, s0 = 0.5;
  SolveOptions solver;
  QuadratureOptions quad;
  bool deterministic = true;
  bool analytic_densities = false;  // skip the solve, evaluate projected exact traces
  double time_cap = 0.0;            // seconds per level, 0 = unlimited
  std::string format = "csv";
  std::string out;
  std::string dump_dir;
  // called after each solved level, e.g. for progress output or extra probes
  std::function<void(const BenchmarkRun&, const LevelResult&)> on_level;

  ReluctivityModel model() const;
  void validate() const;
  std::map<std::string, std::string> echo() const;
};

struct LevelResult {
  int level = 0;
  double h = 1.0;
  int dofs_volume = 0;
  int dofs_bem = 0;
  double error = 0.0;          // max pointwise exterior error
  double per_step_rate = 0.0;  // NaN on the first row
  int iterations = 0;
  double seconds = 0.0;
  double curl_error = 0.0;     // L2 error of curl u inside, NaN when not computed
  std::string failure;         // empty on success
};

struct RateFit {
  double order = 0.0;
  double stderr_order = 0.0;
  std::vector<double> per_step;
  int used = 0;
};
// Least-squares slope of log(error) against log(1/h), negated; only errors
// above 100 machine epsilon are used. Throws with fewer than two usable points.
RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& errors);

struct ConvergenceReport {
  int degree = 1;
  std::vector<LevelResult> levels;
  double rate = 0.0;            // NaN when not fitted
  double rate_stderr = 0.0;
  double curl_rate = 0.0;       // NaN when not fitted
  std::map<std::string, std::string> config;
};

// One benchmark solve at (p, level) with everything kept for inspection.
struct BenchmarkRun {
  BallGeometry ball;
  BoundaryDiscretization bd;
  VolumeDiscretization vd;
  BoundaryOperatorSet ops;
  SpMat trace;
  ProblemData data;
  BlockSystem sys;
  CoupledSolution sol;
};
BenchmarkRun run_benchmark(const StudyConfig& cfg, int level, bool solve = true);
// L2 error of curl u against the exact interior curl 2m/3.
double curl_l2_error(const BenchmarkRun& run, const Vec3& m = Vec3(0, 0, 1));

ConvergenceReport run_convergence_study(const StudyConfig& cfg);

std::string report_csv(const ConvergenceReport& r);
std::string report_json(const ConvergenceReport& r);
ConvergenceReport parse_report_json(const std::string& text);
// format: "csv" or "json"
void emit_report(const ConvergenceReport& r, const std::string& path, const std::string& format);

}  // namespace igabem
