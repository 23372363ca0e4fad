#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "common.hpp"
#include "igabem/config.hpp"
#include "igabem/harness.hpp"

using namespace igabem;
using namespace igabem::testing;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Vec3 random_unit() {
  Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
  while (v.norm() < 1e-3) v = Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
  return v.normalized();
}

}  // namespace

TEST_CASE("magnetized ball solution") {
  // equator just inside the sphere: |u| = 1/3
  CHECK(magnetized_ball_solution(Vec3(1.0 - 1e-12, 0, 0)).norm() == doctest::Approx(1.0 / 3.0));
  CHECK(magnetized_ball_solution(Vec3(0, 0, 0.7)).norm() == 0.0);
  CHECK(magnetized_ball_solution(Vec3(0, 0, -3.0)).norm() == 0.0);
  for (int t = 0; t < 50; ++t) {
    const Vec3 x = random_unit();
    const Vec3 in = magnetized_ball_solution(x * (1.0 - 1e-15)), out = magnetized_ball_solution(x * (1.0 + 1e-15));
    CHECK((in - out).norm() <= 1e-14);
    // purely azimuthal: orthogonal to the position and to the axis
    const Vec3 y = x * uniform(0.1, 4.0);
    const Vec3 u = magnetized_ball_solution(y);
    CHECK(std::abs(u.dot(y)) <= 1e-15);
    CHECK(std::abs(u.z()) <= 1e-15);
    const double rho = y.norm(), sin_theta = std::hypot(y.x(), y.y()) / rho;
    const double expected = rho < 1.0 ? rho / 3.0 * sin_theta : sin_theta / (3.0 * rho * rho);
    CHECK(u.norm() == doctest::Approx(expected).epsilon(1e-13));
  }
  CHECK((magnetized_ball_solution(Vec3(1.5, 0, 0)) - Vec3(0, 1.0 / (3 * 2.25), 0)).norm() <= 1e-16);
  CHECK((magnetized_ball_curl(Vec3(0.1, 0.2, 0.3)) - Vec3(0, 0, 2.0 / 3.0)).norm() <= 1e-15);
  // exterior field is curl-free away from the axis singularity: compare with a finite-difference curl
  const Vec3 x(1.3, -0.4, 0.8);
  const double h = 1e-5;
  Vec3 fd;
  auto u = [](const Vec3& p) { return magnetized_ball_solution(p); };
  auto d = [&](int i) {
    Vec3 e = Vec3::Zero();
    e[i] = h;
    return Vec3((u(x + e) - u(x - e)) / (2 * h));
  };
  const Vec3 dx = d(0), dy = d(1), dz = d(2);
  fd << dy.z() - dz.y(), dz.x() - dx.z(), dx.y() - dy.x();
  CHECK((fd - magnetized_ball_curl(x)).norm() <= 1e-8);
}

TEST_CASE("Fibonacci evaluation points") {
  const auto a = fibonacci_sphere(20, 1.5, 0), b = fibonacci_sphere(20, 1.5, 0), c = fibonacci_sphere(20, 1.5, 3);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i].norm() - 1.5) <= 1e-14);
    CHECK(a[i] == b[i]);
  }
  CHECK((a[5] - c[5]).norm() > 1e-6);
  Vec3 centroid = Vec3::Zero();
  for (const auto& x : a) centroid += x;
  CHECK(centroid.norm() / 20 <= 0.1);
  CHECK_THROWS(fibonacci_sphere(0, 1.5));
}

TEST_CASE("rate fit") {
  const std::vector<double> h{1, 0.5, 0.25};
  CHECK(fit_rate(h, {1, 0.25, 0.0625}).order == doctest::Approx(2.0));
  CHECK(fit_rate(h, {3, 3, 3}).order == doctest::Approx(0.0));
  CHECK(fit_rate(h, {1, 1.0 / 16, 1.0 / 256}).order == doctest::Approx(4.0));
  const RateFit f = fit_rate(h, {1, 0.25, 0.0625});
  REQUIRE(f.per_step.size() == 2);
  CHECK(f.per_step[0] == doctest::Approx(2.0));
  CHECK(f.stderr_order == doctest::Approx(0.0));
  // entries at the roundoff floor are ignored
  const RateFit g = fit_rate({1, 0.5, 0.25, 0.125}, {1, 0.25, 0.0625, 1e-17});
  CHECK(g.used == 3);
  CHECK(g.order == doctest::Approx(2.0));
  CHECK_THROWS_AS(fit_rate({1, 0.5}, {1, 1e-18}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({1}, {1}), std::invalid_argument);
}

TEST_CASE("reports") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ConvergenceReport empty;
  CHECK(report_csv(empty) == "level,h,dofs_volume,dofs_bem,error,per_step_rate,iterations,seconds\n");

  ConvergenceReport r;
  r.degree = 2;
  r.rate = 3.9;
  r.rate_stderr = 0.1;
  r.curl_rate = nan;
  r.config = {{"degree", "2"}, {"geometry", "ball"}};
  LevelResult a;
  a.level = 0;
  a.h = 1;
  a.dofs_volume = 100;
  a.dofs_bem = 7;
  a.error = 0.01;
  a.per_step_rate = nan;
  a.iterations = 12;
  a.curl_error = 0.2;
  LevelResult b = a;
  b.level = 1;
  b.h = 0.5;
  b.error = 0.000625;
  b.per_step_rate = 4.0;
  b.failure = "";
  r.levels = {a, b};

  const std::string csv = report_csv(r);
  std::istringstream in(csv);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].find(",,") != std::string::npos);  // blank first per-step rate
  CHECK(lines[2].rfind("1,0.5,100,7,", 0) == 0);

  const ConvergenceReport back = parse_report_json(report_json(r));
  CHECK(back.degree == r.degree);
  CHECK(back.rate == r.rate);
  CHECK(std::isnan(back.curl_rate));
  CHECK(back.config == r.config);
  REQUIRE(back.levels.size() == 2);
  for (int i = 0; i < 2; ++i) {
    const LevelResult &x = back.levels[i], &y = r.levels[i];
    CHECK(x.level == y.level);
    CHECK(x.h == y.h);
    CHECK(x.dofs_volume == y.dofs_volume);
    CHECK(x.dofs_bem == y.dofs_bem);
    CHECK(x.error == y.error);
    CHECK(x.iterations == y.iterations);
    CHECK(x.curl_error == y.curl_error);
    CHECK(x.failure == y.failure);
  }
  CHECK(std::isnan(back.levels[0].per_step_rate));
  CHECK(back.levels[1].per_step_rate == 4.0);
  CHECK(report_json(back) == report_json(r));

  emit_report(r, "test_report.csv", "csv");
  CHECK(slurp("test_report.csv") == csv);
  std::remove("test_report.csv");
  CHECK_THROWS_AS(emit_report(r, "x.txt", "xml"), std::invalid_argument);
  CHECK_THROWS_AS(emit_report(r, "/nonexistent_dir/report.csv", "csv"), std::runtime_error);
}

TEST_CASE("configuration") {
  std::istringstream in(
      "# study setup\n"
      "degree = 2\n"
      "levels = 0..3   # inclusive\n"
      "radius=2.0\n"
      "material = \"saturation\"\n"
      "material.nu_min = 0.4\n"
      "solver.gauge = epsilon-regularization\n"
      "\n"
      "format = json\n");
  const KeyValues kv = parse_config(in);
  StudyConfig cfg;
  apply_config(kv, cfg);
  CHECK(cfg.degree == 2);
  CHECK(cfg.levels == std::vector<int>{0, 1, 2, 3});
  CHECK(cfg.radius == 2.0);
  CHECK(cfg.material == "saturation");
  CHECK(cfg.nu_min == 0.4);
  CHECK(cfg.solver.gauge == GaugeStrategy::epsilon_regularization);
  CHECK(cfg.format == "json");
  CHECK_NOTHROW(cfg.validate());

  CHECK(parse_levels("1,3") == std::vector<int>{1, 3});
  CHECK_THROWS_AS(parse_levels("3..1"), std::invalid_argument);
  StudyConfig c2;
  CHECK_THROWS_AS(apply_config({{"bogus", "1"}}, c2), std::invalid_argument);
  CHECK_THROWS_AS(apply_config({{"degree", "two"}}, c2), std::invalid_argument);
  std::istringstream bad("degree 2\n");
  CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);

  StudyConfig c3;
  c3.radius = 0.9;
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);
  c3.radius = 1.5;
  c3.levels = {2, 1};
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);
  c3.levels = {};
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);
  c3.levels = {0};
  c3.geometry = "torus";
  CHECK_THROWS_AS(c3.validate(), std::invalid_argument);
}

TEST_CASE("small convergence studies") {
  SUBCASE("p=1 errors decrease") {
    StudyConfig cfg;
    cfg.degree = 1;
    cfg.levels = {0, 1, 2};
    cfg.solver.tol = 1e-10;
    const ConvergenceReport rep = run_convergence_study(cfg);
    REQUIRE(rep.levels.size() == 3);
    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
      CHECK(rep.levels[i].failure.empty());
      CHECK(rep.levels[i].error >= 0.0);
      CHECK(rep.levels[i].seconds == 0.0);
      if (i) CHECK(rep.levels[i].error < rep.levels[i - 1].error);
    }
    CHECK(rep.rate > 1.0);
    // curl converges at about order p
    CHECK(rep.curl_rate >= 0.5);
    CHECK(report_csv(rep) == report_csv(run_convergence_study(cfg)));
  }
  SUBCASE("analytic densities skip the solve and the fit") {
    StudyConfig cfg;
    cfg.degree = 2;
    cfg.levels = {0, 1};
    cfg.analytic_densities = true;
    const ConvergenceReport rep = run_convergence_study(cfg);
    REQUIRE(rep.levels.size() == 2);
    CHECK(std::isnan(rep.rate));
    CHECK(rep.levels[0].iterations == 0);
    CHECK(rep.levels[1].error < rep.levels[0].error);
    CHECK(rep.levels[1].error < 1e-3);
  }
  SUBCASE("time cap stops the study") {
    StudyConfig cfg;
    cfg.degree = 1;
    cfg.levels = {0, 1, 2};
    cfg.time_cap = 1e-9;
    const ConvergenceReport rep = run_convergence_study(cfg);
    REQUIRE(rep.levels.size() == 2);
    CHECK(rep.levels[0].failure.empty());
    CHECK(rep.levels[1].failure.find("skipped") != std::string::npos);
  }
}
