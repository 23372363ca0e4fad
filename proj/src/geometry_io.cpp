#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "igabem/geometry.hpp"

namespace igabem {

// Grammar (whitespace separated, '#' starts a comment):
//   domain <dim>
//   patch <id>
//   degrees <p0> <p1> [<p2>]
//   knots <direction> <t_0> ... <t_m>
//   controls <count>
//   <x> <y> <z> <w>          (count rows, direction 0 fastest)
//   end
//   interface <pa> <axis_a> <side_a> <pb> <axis_b> <side_b> <perm0> <perm1> <perm2> <sign0> <sign1> <sign2>
// Without interface records the table is detected by match_interfaces.
MultipatchDomain read_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_geometry: cannot open " + path);
  std::stringstream clean;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    clean << line << '\n';
  }
  MultipatchDomain dom;
  std::string tok;
  bool have_interfaces = false;
  while (clean >> tok) {
    if (tok == "domain") {
      clean >> dom.dim;
      if (dom.dim != 2 && dom.dim != 3) throw std::runtime_error("read_geometry: domain dimension must be 2 or 3");
    } else if (tok == "patch") {
      int id = 0;
      clean >> id;
      std::array<int, 3> deg{0, 0, 0};
      std::array<KnotVector, 3> knots;
      std::vector<Vec3> pts;
      std::vector<double> wts;
      std::string key;
      while (clean >> key && key != "end") {
        if (key == "degrees") {
          for (int d = 0; d < dom.dim; ++d) clean >> deg[d];
        } else if (key == "knots") {
          int dir = 0;
          clean >> dir;
          if (dir < 0 || dir >= dom.dim) throw std::runtime_error("read_geometry: bad knot direction in patch " + std::to_string(id));
          std::vector<double> t;
          double v;
          std::streampos pos = clean.tellg();
          while (clean >> v) {
            t.push_back(v);
            pos = clean.tellg();
          }
          clean.clear();
          clean.seekg(pos);
          knots[dir] = KnotVector(deg[dir], t);
        } else if (key == "controls") {
          std::size_t n = 0;
          clean >> n;
          pts.resize(n);
          wts.resize(n);
          for (std::size_t i = 0; i < n; ++i) clean >> pts[i].x() >> pts[i].y() >> pts[i].z() >> wts[i];
          if (!clean) throw std::runtime_error("read_geometry: truncated control table in patch " + std::to_string(id));
        } else {
          throw std::runtime_error("read_geometry: unknown key '" + key + "' in patch " + std::to_string(id));
        }
      }
      if (id != static_cast<int>(dom.patches.size()))
        throw std::runtime_error("read_geometry: patch ids must be consecutive from 0");
      dom.patches.emplace_back(id, dom.dim, knots, pts, wts);
    } else if (tok == "interface") {
      Interface itf;
      clean >> itf.patch_a >> itf.axis_a >> itf.side_a >> itf.patch_b >> itf.axis_b >> itf.side_b;
      for (int i = 0; i < 3; ++i) clean >> itf.orient.perm[i];
      for (int i = 0; i < 3; ++i) clean >> itf.orient.sign[i];
      if (!clean) throw std::runtime_error("read_geometry: malformed interface record");
      if (itf.orient.determinant() != 1) throw std::runtime_error("read_geometry: orientation-reversing interface");
      dom.interfaces.push_back(itf);
      have_interfaces = true;
    } else {
      throw std::runtime_error("read_geometry: unexpected token '" + tok + "'");
    }
  }
  if (dom.patches.empty()) throw std::runtime_error("read_geometry: no patches in " + path);
  if (!have_interfaces) match_interfaces(dom);
  return dom;
}

void write_geometry(const MultipatchDomain& dom, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_geometry: cannot open " + path);
  out << std::setprecision(17);
  out << "domain " << dom.dim << "\n";
  for (const auto& p : dom.patches) {
    out << "patch " << p.id << "\ndegrees";
    for (int d = 0; d < dom.dim; ++d) out << ' ' << p.knots[d].degree();
    out << '\n';
    for (int d = 0; d < dom.dim; ++d) {
      out << "knots " << d;
      for (double t : p.knots[d].knots()) out << ' ' << t;
      out << '\n';
    }
    out << "controls " << p.points.size() << '\n';
    for (std::size_t i = 0; i < p.points.size(); ++i)
      out << p.points[i].x() << ' ' << p.points[i].y() << ' ' << p.points[i].z() << ' ' << p.weights[i] << '\n';
    out << "end\n";
  }
  for (const auto& itf : dom.interfaces) {
    out << "interface " << itf.patch_a << ' ' << itf.axis_a << ' ' << itf.side_a << ' ' << itf.patch_b << ' '
        << itf.axis_b << ' ' << itf.side_b;
    for (int i = 0; i < 3; ++i) out << ' ' << itf.orient.perm[i];
    for (int i = 0; i < 3; ++i) out << ' ' << itf.orient.sign[i];
    out << '\n';
  }
}

}  // namespace igabem
