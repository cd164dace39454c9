// SVG emitter: the whole union drawn in grey, each requested path drawn on
// top in its own color.  Pure text output, deterministic for a given graph
// and path set; requires vertex coordinates.
#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ncsp/error.hpp"
#include "ncsp/plane_graph.hpp"

namespace ncsp::render {

struct RenderOptions {
  double margin = 24.0;     // free border around the drawing, in output units
  double scale = 48.0;      // output units per input coordinate unit
  double edge_width = 1.5;  // grey underlay stroke width
  double path_width = 4.0;  // colored path stroke width
  bool vertex_dots = true;
  bool labels = true;  // s/t labels next to terminal vertices
};

namespace detail {

// Fixed palette, repeated when there are more paths than entries.
inline const char* path_color(std::size_t i) {
  static const char* const kPalette[] = {
      "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
      "#17becf", "#e377c2", "#8c564b", "#bcbd22", "#7f7f7f",
  };
  return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

// Deterministic number formatting: fixed two decimals, no negative zero.
inline std::string num(double v) {
  std::ostringstream os;
  double r = std::round(v * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << r;
  return os.str();
}

}  // namespace detail

// Draw the union graph in grey and the given dart sequences in colors.
// Every path is a dart walk (tail of the first dart is its source); labels
// name each path's endpoints s<i>/t<i> by its position in `paths`.
inline void write_svg(std::ostream& out, const PlaneGraph& g,
                      const std::vector<std::vector<DartId>>& paths,
                      const RenderOptions& opt = {}) {
  require(g.has_coordinates(), ErrorCode::MissingCoordinates,
          "rendering needs per-vertex coordinates in the instance file");
  const std::vector<Coord>& c = g.coordinates();
  double xmin = c[0].x, xmax = c[0].x, ymin = c[0].y, ymax = c[0].y;
  for (const Coord& p : c) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double w = (xmax - xmin) * opt.scale + 2 * opt.margin;
  const double h = (ymax - ymin) * opt.scale + 2 * opt.margin;
  // SVG y grows downward; flip so the input's y grows upward.
  const auto X = [&](Vertex v) {
    return detail::num(opt.margin + (c[static_cast<std::size_t>(v)].x - xmin) * opt.scale);
  };
  const auto Y = [&](Vertex v) {
    return detail::num(opt.margin + (ymax - c[static_cast<std::size_t>(v)].y) * opt.scale);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(w) << "\" height=\""
      << detail::num(h) << "\" viewBox=\"0 0 " << detail::num(w) << " " << detail::num(h)
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  out << "<g stroke=\"#c0c0c0\" stroke-width=\"" << detail::num(opt.edge_width)
      << "\" stroke-linecap=\"round\">\n";
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const DartId d = dart_forward(e);
    out << "<line x1=\"" << X(g.tail(d)) << "\" y1=\"" << Y(g.tail(d)) << "\" x2=\""
        << X(g.head(d)) << "\" y2=\"" << Y(g.head(d)) << "\"/>\n";
  }
  out << "</g>\n";

  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::vector<DartId>& p = paths[i];
    if (p.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << detail::path_color(i) << "\" stroke-width=\""
        << detail::num(opt.path_width) << "\" stroke-linecap=\"round\" stroke-opacity=\"0.8\" "
        << "points=\"";
    out << X(g.tail(p[0])) << "," << Y(g.tail(p[0]));
    for (const DartId d : p) out << " " << X(g.head(d)) << "," << Y(g.head(d));
    out << "\"/>\n";
  }

  if (opt.vertex_dots) {
    out << "<g fill=\"#404040\">\n";
    for (Vertex v = 0; v < g.vertex_count(); ++v)
      out << "<circle cx=\"" << X(v) << "\" cy=\"" << Y(v) << "\" r=\"2.5\"/>\n";
    out << "</g>\n";
  }

  if (opt.labels) {
    out << "<g font-family=\"sans-serif\" font-size=\"14\">\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const std::vector<DartId>& p = paths[i];
      if (p.empty()) continue;
      const Vertex s = g.tail(p.front());
      const Vertex t = g.head(p.back());
      out << "<text x=\"" << X(s) << "\" y=\"" << Y(s) << "\" dx=\"5\" dy=\"-5\" fill=\""
          << detail::path_color(i) << "\">s" << i << "</text>\n";
      out << "<text x=\"" << X(t) << "\" y=\"" << Y(t) << "\" dx=\"5\" dy=\"-5\" fill=\""
          << detail::path_color(i) << "\">t" << i << "</text>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace ncsp::render
