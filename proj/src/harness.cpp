#include "igabem/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace igabem {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Vec3 magnetized_ball_solution(const Vec3& x, const Vec3& m) {
  const double r = x.norm();
  if (r <= 1.0) return m.cross(x) / 3.0;
  return m.cross(x) / (3.0 * r * r * r);
}

Vec3 magnetized_ball_curl(const Vec3& x, const Vec3& m) {
  const double r = x.norm();
  if (r <= 1.0) return 2.0 * m / 3.0;
  const double r3 = r * r * r;
  return (3.0 * m.dot(x) * x / (r3 * r * r) - m / r3) / 3.0;
}

Vec3 magnetized_ball_neumann(const Vec3& x, const Vec3& m) {
  const Vec3 n = x.normalized();
  return n.cross(m) / 3.0;
}

std::vector<Vec3> fibonacci_sphere(int n, double radius, unsigned seed) {
  if (n <= 0) throw std::invalid_argument("fibonacci_sphere: need at least one point");
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  const double offset = 2.0 * M_PI * std::fmod(seed * 0.6180339887498949, 1.0);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i + offset;
    Vec3 p(rho * std::cos(phi), rho * std::sin(phi), z);
    pts.push_back(radius * p / p.norm());
  }
  return pts;
}

ReluctivityModel StudyConfig::model() const {
  if (material == "identity") return ReluctivityModel::identity();
  if (material == "saturation") return ReluctivityModel::saturation(nu_min, s0);
  throw std::invalid_argument("unknown material '" + material + "' (identity|saturation)");
}

void StudyConfig::validate() const {
  if (geometry != "ball") throw std::invalid_argument("unsupported geometry '" + geometry + "' (only 'ball')");
  if (degree < 1) throw std::invalid_argument("degree must be at least 1");
  if (levels.empty()) throw std::invalid_argument("level range is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0) throw std::invalid_argument("levels must be nonnegative");
    if (i && levels[i] <= levels[i - 1]) throw std::invalid_argument("levels must be increasing");
  }
  if (!(radius > 1.0)) throw std::invalid_argument("evaluation radius must exceed 1");
  if (npoints < 1) throw std::invalid_argument("npoints must be positive");
  if (!(solver.tol > 0.0)) throw std::invalid_argument("solver.tol must be positive");
  if (solver.gauge == GaugeStrategy::epsilon_regularization && !(solver.eps > 0.0 && solver.eps <= 1e-4))
    throw std::invalid_argument("solver.eps must lie in (0, 1e-4]");
  if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
  model();
}

std::map<std::string, std::string> StudyConfig::echo() const {
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  };
  std::ostringstream lv;
  for (std::size_t i = 0; i < levels.size(); ++i) lv << (i ? "," : "") << levels[i];
  return {
      {"geometry", geometry},
      {"geometry.inner", num(inner_half_width)},
      {"degree", std::to_string(degree)},
      {"levels", lv.str()},
      {"radius", num(radius)},
      {"npoints", std::to_string(npoints)},
      {"seed", std::to_string(seed)},
      {"material", material},
      {"material.nu_min", num(nu_min)},
      {"material.s0", num(s0)},
      {"solver.tol", num(solver.tol)},
      {"solver.maxit", std::to_string(solver.maxit)},
      {"solver.gauge", to_string(solver.gauge)},
      {"solver.eps", num(solver.eps)},
      {"picard.tol", num(solver.picard_tol)},
      {"picard.maxit", std::to_string(solver.picard_maxit)},
      {"picard.damping", num(solver.picard_damping)},
      {"quad.regular", std::to_string(quad.regular)},
      {"quad.singular", std::to_string(quad.singular)},
      {"quad.tol", num(quad.tol)},
      {"deterministic", deterministic ? "true" : "false"},
      {"analytic", analytic_densities ? "true" : "false"},
  };
}

RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& errors) {
  if (h.size() != errors.size()) throw std::invalid_argument("fit_rate: h and errors differ in length");
  const double floor = 100.0 * std::numeric_limits<double>::epsilon();
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (std::isfinite(errors[i]) && errors[i] > floor && h[i] > 0.0) {
      X.push_back(std::log(1.0 / h[i]));
      Y.push_back(std::log(errors[i]));
    }
  if (X.size() < 2) throw std::invalid_argument("fit_rate: fewer than two usable points");
  const double n = static_cast<double>(X.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    mx += X[i] / n;
    my += Y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_rate: h values must differ");
  RateFit fit;
  const double slope = sxy / sxx;
  fit.order = -slope;
  fit.used = static_cast<int>(X.size());
  if (X.size() > 2) {
    double sse = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double e = Y[i] - (my + slope * (X[i] - mx));
      sse += e * e;
    }
    fit.stderr_order = std::sqrt(sse / (n - 2.0) / sxx);
  }
  for (std::size_t i = 1; i < h.size(); ++i)
    fit.per_step.push_back(std::log(errors[i - 1] / errors[i]) / std::log(h[i - 1] / h[i]));
  return fit;
}

BenchmarkRun run_benchmark(const StudyConfig& cfg, int level, bool solve) {
  BenchmarkRun run;
  run.ball = build_unit_ball(level, cfg.degree, cfg.inner_half_width);
  run.bd = build_boundary(run.ball.surface, cfg.degree, level, cfg.quad);
  run.ops = assemble_operators(run.bd, op_flux);
  run.vd = build_volume(run.ball.volume, cfg.degree, level, 0, cfg.quad.threads);
  run.trace = trace_map(run.vd.complex.spaces[1], run.bd.complex.spaces[1], run.ball.surface_owner);
  run.data.phi0 = magnetization_jump(cfg.magnetization);
  run.data.model = cfg.model();
  run.sys = assemble_block(run.data, run.vd, run.bd, run.ops, run.trace);
  if (!cfg.dump_dir.empty()) dump_operators(cfg.dump_dir + "/level_" + std::to_string(level), run.ops, run.sys);
  if (solve) {
    if (run.data.model.kind == ReluctivityModel::Kind::identity)
      run.sol = solve_linear(run.sys, cfg.solver);
    else
      run.sol = solve_picard(run.data, run.vd, run.sys, cfg.solver);
  }
  return run;
}

double curl_l2_error(const BenchmarkRun& run, const Vec3& m) {
  const Vec w = run.vd.complex.d[1] * run.sol.u;
  const Vec3 c = magnetized_ball_curl(Vec3::Zero(), m);
  const SpMat M2 = assemble_mass(run.vd, 2);
  const Vec b = assemble_form_load(run.vd, 2, [&](const Vec3&) { return c; });
  const double vol = assemble_form_load(run.vd, 0, [](const Vec3&) { return Vec3(1, 0, 0); }).sum();
  return std::sqrt(std::max(0.0, w.dot(M2 * w) - 2.0 * w.dot(b) + c.squaredNorm() * vol));
}

ConvergenceReport run_convergence_study(const StudyConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.degree = cfg.degree;
  rep.config = cfg.echo();
  const auto pts = fibonacci_sphere(cfg.npoints, cfg.radius, cfg.seed);
  double last_seconds = 0.0;
  for (int level : cfg.levels) {
    LevelResult lr;
    lr.level = level;
    lr.h = std::ldexp(1.0, -level);
    lr.per_step_rate = kNaN;
    lr.curl_error = kNaN;
    if (cfg.time_cap > 0.0 && last_seconds * 8.0 > cfg.time_cap) {
      std::ostringstream os;
      os << "skipped: projected time " << last_seconds * 8.0 << " s exceeds cap " << cfg.time_cap << " s";
      lr.failure = os.str();
      lr.error = kNaN;
      rep.levels.push_back(lr);
      break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      BenchmarkRun run = run_benchmark(cfg, level, !cfg.analytic_densities);
      lr.dofs_volume = run.vd.complex.spaces[1].size();
      lr.dofs_bem = run.bd.solenoidal.size();
      Vec dirichlet, neumann;
      if (cfg.analytic_densities) {
        dirichlet = project_tangential(run.bd, [&](const Vec3& x) {
          const double r = x.norm();
          return Vec3(cfg.magnetization.cross(x) / (3.0 * r * r * r));
        });
        neumann = project_flux(run.bd, [&](const Vec3& x) { return magnetized_ball_neumann(x, cfg.magnetization); });
      } else {
        dirichlet = run.sys.trace * run.sol.u - run.sys.u0;
        neumann = run.bd.solenoidal.Z * run.sol.phi;
        lr.iterations = run.sol.iterations;
        if (cfg.material == "identity") lr.curl_error = curl_l2_error(run, cfg.magnetization);
      }
      double err = 0.0;
      for (const auto& x : pts) {
        const Vec3 v = eval_representation(run.bd, x, dirichlet, neumann, Side::exterior);
        err = std::max(err, (v - magnetized_ball_solution(x, cfg.magnetization)).norm());
      }
      lr.error = err;
      if (cfg.on_level) cfg.on_level(run, lr);
    } catch (const std::exception& e) {
      lr.failure = e.what();
      lr.error = kNaN;
    }
    last_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    lr.seconds = cfg.deterministic ? 0.0 : last_seconds;
    if (!rep.levels.empty() && rep.levels.back().failure.empty() && lr.failure.empty())
      lr.per_step_rate = std::log(rep.levels.back().error / lr.error) / std::log(rep.levels.back().h / lr.h);
    rep.levels.push_back(lr);
    if (!lr.failure.empty()) break;
  }
  rep.rate = rep.rate_stderr = rep.curl_rate = kNaN;
  std::vector<double> h, e, ce;
  for (const auto& l : rep.levels)
    if (l.failure.empty()) {
      h.push_back(l.h);
      e.push_back(l.error);
      ce.push_back(l.curl_error);
    }
  if (!cfg.analytic_densities) {
    try {
      const RateFit f = fit_rate(h, e);
      rep.rate = f.order;
      rep.rate_stderr = f.stderr_order;
    } catch (const std::invalid_argument&) {
    }
    try {
      rep.curl_rate = fit_rate(h, ce).order;
    } catch (const std::invalid_argument&) {
    }
  }
  return rep;
}

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

nlohmann::json num_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double num_from(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

std::string report_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "level,h,dofs_volume,dofs_bem,error,per_step_rate,iterations,seconds\n";
  for (const auto& l : r.levels)
    os << l.level << ',' << fmt(l.h) << ',' << l.dofs_volume << ',' << l.dofs_bem << ',' << fmt(l.error) << ','
       << fmt(l.per_step_rate) << ',' << l.iterations << ',' << fmt(l.seconds) << '\n';
  return os.str();
}

std::string report_json(const ConvergenceReport& r) {
  nlohmann::json j;
  j["degree"] = r.degree;
  j["rate"] = num_or_null(r.rate);
  j["rate_stderr"] = num_or_null(r.rate_stderr);
  j["curl_rate"] = num_or_null(r.curl_rate);
  j["config"] = r.config;
  j["levels"] = nlohmann::json::array();
  for (const auto& l : r.levels)
    j["levels"].push_back({{"level", l.level},
                           {"h", l.h},
                           {"dofs_volume", l.dofs_volume},
                           {"dofs_bem", l.dofs_bem},
                           {"error", num_or_null(l.error)},
                           {"per_step_rate", num_or_null(l.per_step_rate)},
                           {"iterations", l.iterations},
                           {"seconds", num_or_null(l.seconds)},
                           {"curl_error", num_or_null(l.curl_error)},
                           {"failure", l.failure}});
  return j.dump(2) + "\n";
}

ConvergenceReport parse_report_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ConvergenceReport r;
  r.degree = j.at("degree").get<int>();
  r.rate = num_from(j.at("rate"));
  r.rate_stderr = num_from(j.at("rate_stderr"));
  r.curl_rate = num_from(j.at("curl_rate"));
  r.config = j.at("config").get<std::map<std::string, std::string>>();
  for (const auto& e : j.at("levels")) {
    LevelResult l;
    l.level = e.at("level").get<int>();
    l.h = e.at("h").get<double>();
    l.dofs_volume = e.at("dofs_volume").get<int>();
    l.dofs_bem = e.at("dofs_bem").get<int>();
    l.error = num_from(e.at("error"));
    l.per_step_rate = num_from(e.at("per_step_rate"));
    l.iterations = e.at("iterations").get<int>();
    l.seconds = num_from(e.at("seconds"));
    l.curl_error = num_from(e.at("curl_error"));
    l.failure = e.at("failure").get<std::string>();
    r.levels.push_back(l);
  }
  return r;
}

void emit_report(const ConvergenceReport& r, const std::string& path, const std::string& format) {
  std::string text;
  if (format == "csv") text = report_csv(r);
  else if (format == "json") text = report_json(r);
  else throw std::invalid_argument("emit_report: unknown format '" + format + "'");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_report: cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

}  // namespace igabem
