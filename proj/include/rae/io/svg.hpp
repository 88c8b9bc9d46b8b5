#pragma once

// Minimal static SVG and OBJ emitters. World y points up; SVG y points down,
// so y is negated on output.

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rae/envelope.hpp"
#include "rae/io/format.hpp"

namespace rae::io {

struct SvgPath {
  std::vector<Eigen::Vector2d> points;
  bool closed = false;
  std::string stroke = "#000000";
  double width = 1.0;  // in units of the base stroke width
  std::string id;
};

class SvgDocument {
 public:
  void add(SvgPath p) { paths_.push_back(std::move(p)); }

  std::string str() const {
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
    double xmax = -xmin, ymax = -xmin;
    for (const auto& p : paths_) {
      for (const auto& q : p.points) {
        xmin = std::min(xmin, q.x());
        xmax = std::max(xmax, q.x());
        ymin = std::min(ymin, -q.y());
        ymax = std::max(ymax, -q.y());
      }
    }
    if (!(xmax >= xmin)) xmin = ymin = 0.0, xmax = ymax = 1.0;
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
    const double mx = std::max(0.1 * (xmax - xmin), 0.05 * span);
    const double my = std::max(0.1 * (ymax - ymin), 0.05 * span);
    const double x0 = xmin - mx, y0 = ymin - my, w = xmax - xmin + 2 * mx, h = ymax - ymin + 2 * my;
    const double base = 0.002 * std::max(w, h);

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_fixed(x0) << ' ' << format_fixed(y0)
       << ' ' << format_fixed(w) << ' ' << format_fixed(h) << "\" width=\"800\" height=\""
       << format_fixed(800.0 * h / w, 0) << "\">\n";
    for (const auto& p : paths_) {
      if (p.points.empty()) continue;
      os << "  <path";
      if (!p.id.empty()) os << " id=\"" << p.id << "\"";
      os << " fill=\"none\" stroke=\"" << p.stroke << "\" stroke-width=\"" << format_fixed(base * p.width, 6)
         << "\" d=\"";
      for (std::size_t i = 0; i < p.points.size(); ++i) {
        os << (i ? " L" : "M") << format_fixed(p.points[i].x()) << ' ' << format_fixed(-p.points[i].y());
      }
      if (p.closed) os << " Z";
      os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
  }

 private:
  std::vector<SvgPath> paths_;
};

inline std::vector<Eigen::Vector2d> loop_points(const EnvelopeGeometry& g) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(g.vertices.size());
  for (const auto& v : g.vertices) out.push_back(v.head<2>());
  return out;
}

// Wavefront OBJ with one object per envelope; indices are 1-based.
inline std::string obj_mesh(const std::vector<EnvelopeGeometry>& shells, const std::vector<std::string>& names) {
  std::ostringstream os;
  std::size_t offset = 1;
  for (std::size_t s = 0; s < shells.size(); ++s) {
    os << "o " << (s < names.size() ? names[s] : "envelope_" + std::to_string(s + 1)) << '\n';
    for (const auto& v : shells[s].vertices)
      os << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
    for (const auto& t : shells[s].triangles)
      os << "f " << t[0] + offset << ' ' << t[1] + offset << ' ' << t[2] + offset << '\n';
    offset += shells[s].vertices.size();
  }
  return os.str();
}

}  // namespace rae::io
