#include "igabem/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace igabem {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

KeyValues parse_config(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // a '#' inside quotes is kept
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    kv[key] = value;
  }
  return kv;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return parse_config(in);
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int a = to_int("levels", trim(text.substr(0, dots)));
    const int b = to_int("levels", trim(text.substr(dots + 2)));
    if (b < a) throw std::invalid_argument("levels: empty range '" + text + "'");
    for (int l = a; l <= b; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int("levels", trim(item)));
  if (out.empty()) throw std::invalid_argument("levels: empty list");
  return out;
}

void apply_config(const KeyValues& kv, StudyConfig& cfg) {
  for (const auto& [key, v] : kv) {
    if (key == "geometry") cfg.geometry = v;
    else if (key == "geometry.inner") cfg.inner_half_width = to_double(key, v);
    else if (key == "degree") cfg.degree = to_int(key, v);
    else if (key == "levels") cfg.levels = parse_levels(v);
    else if (key == "level") cfg.levels = {to_int(key, v)};
    else if (key == "radius") cfg.radius = to_double(key, v);
    else if (key == "npoints") cfg.npoints = to_int(key, v);
    else if (key == "seed") cfg.seed = static_cast<unsigned>(to_int(key, v));
    else if (key == "material") cfg.material = v;
    else if (key == "material.nu_min") cfg.nu_min = to_double(key, v);
    else if (key == "material.s0") cfg.s0 = to_double(key, v);
    else if (key == "solver.tol") cfg.solver.tol = to_double(key, v);
    else if (key == "solver.maxit") cfg.solver.maxit = to_int(key, v);
    else if (key == "solver.gauge") cfg.solver.gauge = parse_gauge(v);
    else if (key == "solver.eps") cfg.solver.eps = to_double(key, v);
    else if (key == "solver.direct") cfg.solver.direct = to_bool(key, v);
    else if (key == "picard.tol") cfg.solver.picard_tol = to_double(key, v);
    else if (key == "picard.maxit") cfg.solver.picard_maxit = to_int(key, v);
    else if (key == "picard.damping") cfg.solver.picard_damping = to_double(key, v);
    else if (key == "quad.regular") cfg.quad.regular = to_int(key, v);
    else if (key == "quad.singular") cfg.quad.singular = to_int(key, v);
    else if (key == "quad.tol") cfg.quad.tol = to_double(key, v);
    else if (key == "threads") cfg.quad.threads = to_int(key, v);
    else if (key == "deterministic") cfg.deterministic = cfg.solver.deterministic = to_bool(key, v);
    else if (key == "analytic") cfg.analytic_densities = to_bool(key, v);
    else if (key == "time_cap") cfg.time_cap = to_double(key, v);
    else if (key == "format") cfg.format = v;
    else if (key == "out") cfg.out = v;
    else if (key == "dump_operators") cfg.dump_dir = v;
    else if (key == "log_iterations") cfg.solver.log_path = v;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

}  // namespace igabem
