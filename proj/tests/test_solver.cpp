#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "common.hpp"
#include "igabem/harness.hpp"
#include "igabem/solver.hpp"

using namespace igabem;
using namespace igabem::testing;

namespace {

StudyConfig config(int p, const std::string& material = "identity") {
  StudyConfig cfg;
  cfg.degree = p;
  cfg.material = material;
  cfg.solver.tol = 1e-10;
  return cfg;
}

double rel_diff(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(a.norm(), b.norm()); }

}  // namespace

TEST_CASE("gauge strategy names") {
  CHECK(parse_gauge("consistent-krylov") == GaugeStrategy::consistent_krylov);
  CHECK(parse_gauge("epsilon-regularization") == GaugeStrategy::epsilon_regularization);
  CHECK(parse_gauge("epsilon") == GaugeStrategy::epsilon_regularization);
  CHECK(to_string(GaugeStrategy::consistent_krylov) == "consistent-krylov");
  CHECK_THROWS_AS(parse_gauge("none"), std::invalid_argument);
}

TEST_CASE("BiCGSTAB") {
  const int n = 40;
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2.0 + i;
    if (i + 1 < n) A(i, i + 1) = -1.0, A(i + 1, i) = -0.5;
  }
  Vec b(n);
  for (int i = 0; i < n; ++i) b[i] = std::sin(i + 1.0);
  const KrylovResult r = bicgstab([&](const Vec& x) { return Vec(A * x); }, b, A.diagonal(), 1e-12, 500);
  CHECK(r.converged);
  CHECK((b - A * r.x).norm() <= 1e-12);
  CHECK(r.history.size() >= 1);
  const KrylovResult z = bicgstab([&](const Vec& x) { return Vec(A * x); }, Vec::Zero(n), A.diagonal(), 1e-12, 10);
  CHECK(z.converged);
  CHECK(z.x.norm() == 0.0);
}

TEST_CASE("coupled system on the ball") {
  BenchmarkRun run = run_benchmark(config(1), 1, false);
  const BlockSystem& sys = run.sys;
  CHECK(sys.consistency_defect <= 1e-10);
  CHECK(sys.Gb.cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("residual is the componentwise definition") {
    Vec u(sys.nu()), phi(sys.nphi());
    for (int i = 0; i < u.size(); ++i) u[i] = uniform(-1, 1);
    for (int i = 0; i < phi.size(); ++i) phi[i] = uniform(-1, 1);
    Vec x(sys.size());
    x << u, phi;
    const Vec r = sys.residual(u, phi);
    CHECK((r - (sys.rhs() - sys.apply(x))).cwiseAbs().maxCoeff() == 0.0);
    const Vec top = sys.F - (sys.K * u - SpMat(sys.T.transpose()) * phi);
    const Vec bottom = sys.Gb - (sys.Bs * (sys.trace * u) + sys.A0 * phi);
    CHECK((r.head(sys.nu()) - top).cwiseAbs().maxCoeff() <= 1e-13 * top.cwiseAbs().maxCoeff());
    CHECK((r.tail(sys.nphi()) - bottom).cwiseAbs().maxCoeff() <= 1e-13 * bottom.cwiseAbs().maxCoeff());
    const SpMat S = sys.assemble_sparse(sys.K);
    CHECK((Vec(S * x) - sys.apply(x)).cwiseAbs().maxCoeff() <= 1e-12 * sys.apply(x).cwiseAbs().maxCoeff());
  }

  SUBCASE("zero right-hand side gives zero") {
    BlockSystem z = sys;
    z.F.setZero();
    z.Gb.setZero();
    const CoupledSolution s = solve_linear(z, SolveOptions{});
    CHECK(s.u.norm() == 0.0);
    CHECK(s.phi.norm() == 0.0);
  }

  SUBCASE("strategies agree") {
    SolveOptions a;
    a.tol = 1e-10;
    SolveOptions b = a;
    b.gauge = GaugeStrategy::epsilon_regularization;
    b.eps = 1e-8;
    const CoupledSolution sa = solve_linear(sys, a), sb = solve_linear(sys, b);
    const SpMat& C = run.vd.complex.d[1];
    CHECK(rel_diff(C * sa.u, C * sb.u) <= 1e-5);
    CHECK(rel_diff(sa.phi, sb.phi) <= 1e-5);
    CHECK(sa.strategy == "consistent-krylov");
    CHECK(sb.strategy == "epsilon-regularization");
  }

  SUBCASE("gauge invariance of the regularized Krylov path") {
    SolveOptions o;
    o.tol = 1e-10;
    o.gauge = GaugeStrategy::epsilon_regularization;
    o.direct = false;
    o.coulomb_gauge = false;
    const Vec x0 = Vec::Zero(sys.size());
    Vec x1 = x0;
    Vec p(run.vd.complex.spaces[0].size());
    for (int i = 0; i < p.size(); ++i) p[i] = uniform(-1, 1);
    x1.head(sys.nu()) = sys.G * p;
    const CoupledSolution s0 = solve_linear(sys, o, &x0), s1 = solve_linear(sys, o, &x1);
    const SpMat& C = run.vd.complex.d[1];
    CHECK(rel_diff(C * s0.u, C * s1.u) <= 10 * o.tol);
    CHECK(rel_diff(s0.phi, s1.phi) <= 10 * o.tol);
  }

  SUBCASE("Coulomb projection removes gradients only") {
    const CoupledSolution s = solve_linear(sys, SolveOptions{});
    Vec p(run.vd.complex.spaces[0].size());
    for (int i = 0; i < p.size(); ++i) p[i] = uniform(-1, 1);
    double removed = 0.0;
    const Vec g = coulomb_projection(sys, s.u + sys.G * p, &removed);
    CHECK((g - s.u).norm() <= 1e-8 * s.u.norm());
    CHECK(removed > 0.0);
  }

  SUBCASE("inconsistent data is refused by the Krylov path") {
    BlockSystem bad = sys;
    bad.consistency_defect = 1.0;
    CHECK_THROWS_AS(solve_linear(bad, SolveOptions{}), std::runtime_error);
    SolveOptions e;
    e.gauge = GaugeStrategy::epsilon_regularization;
    CHECK_NOTHROW(solve_linear(bad, e));
  }

  SUBCASE("iteration log") {
    SolveOptions o;
    o.log_path = "test_krylov_log.csv";
    const CoupledSolution s = solve_linear(sys, o);
    std::ifstream in(o.log_path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iteration,residual");
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == static_cast<int>(s.residuals.size()));
    in.close();
    std::remove(o.log_path.c_str());
  }
}

TEST_CASE("Picard iteration") {
  SUBCASE("identity reluctivity converges in one step") {
    BenchmarkRun run = run_benchmark(config(1), 0, false);
    const CoupledSolution s = solve_picard(run.data, run.vd, run.sys, config(1).solver);
    CHECK(s.picard_iterations == 1);
  }
  SUBCASE("saturation on the ball") {
    StudyConfig cfg = config(1, "saturation");
    BenchmarkRun run = run_benchmark(cfg, 1, false);
    const CoupledSolution s = solve_picard(run.data, run.vd, run.sys, cfg.solver);
    REQUIRE(s.increments.size() >= 3);
    CHECK(s.increments.back() < cfg.solver.picard_tol);
    CHECK(s.picard_iterations <= 50);
    // monotone after the first two iterations
    for (std::size_t k = 2; k < s.increments.size(); ++k) CHECK(s.increments[k] < s.increments[k - 1]);
    const double r = nonlinear_residual(run.vd, run.data.model, run.sys, s.u, s.phi);
    CHECK(r <= 1e-6 * (1.0 + run.sys.rhs().norm()));

    StudyConfig damped = cfg;
    damped.solver.picard_damping = 0.5;
    const CoupledSolution sd = solve_picard(run.data, run.vd, run.sys, damped.solver);
    CHECK(sd.increments.back() < cfg.solver.picard_tol);
    CHECK(sd.picard_iterations >= s.picard_iterations);

    StudyConfig starved = cfg;
    starved.solver.picard_maxit = 2;
    CHECK_THROWS_AS(solve_picard(run.data, run.vd, run.sys, starved.solver), std::runtime_error);
  }
}

TEST_CASE("exterior evaluation of the benchmark") {
  BenchmarkRun run = run_benchmark(config(2), 2);
  const std::vector<Vec3> pts{Vec3(1.5, 0, 0), Vec3(2, 0, 0), Vec3(5, 0, 0)};
  const std::vector<Vec3> v = evaluate_exterior(run.bd, run.sys, run.sol, pts);
  const Vec3 exact(0, 1.0 / (3 * 1.5 * 1.5), 0);
  CHECK((v[0] - exact).norm() <= 5e-3 * exact.norm());
  CHECK(v[2].norm() < v[1].norm());

  CoupledSolution zero = run.sol;
  zero.u.setZero();
  zero.phi.setZero();
  BlockSystem sys = run.sys;
  sys.u0.setZero();
  CHECK(evaluate_exterior(run.bd, sys, zero, pts)[0].norm() == 0.0);
}
