#include "svgout.hpp"

#include <algorithm>
#include <cmath>

#include "numfmt.hpp"

namespace aidl {

namespace {

struct Bounds {
  double minx = 0, miny = 0, maxx = 0, maxy = 0;
  bool any = false;

  void add(const geobool::Vec2& p) {
    if (!any) {
      minx = maxx = p.x;
      miny = maxy = p.y;
      any = true;
      return;
    }
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
};

// model y-up, SVG y-down
std::string pt(const geobool::Vec2& p) {
  return fmt_double(p.x) + " " + fmt_double(-p.y);
}

void ring_path(std::string& d, const geobool::Ring& r) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    d += i == 0 ? "M " : "L ";
    d += pt(r[i]);
    d += ' ';
  }
  d += "Z ";
}

}  // namespace

std::string render_svg(const geobool::SceneOutput& scene, double chord_tol) {
  Bounds b;
  for (const auto& f : scene.faces) {
    for (const auto& p : f.outer) b.add(p);
    for (const auto& h : f.holes)
      for (const auto& p : h) b.add(p);
  }
  std::vector<std::vector<geobool::Vec2>> edge_polys;
  for (const auto& e : scene.drawing_edges) {
    edge_polys.push_back(geobool::tessellate(e, chord_tol));
    for (const auto& p : edge_polys.back()) b.add(p);
  }

  double w = b.any ? b.maxx - b.minx : 1.0;
  double h = b.any ? b.maxy - b.miny : 1.0;
  if (w <= 0) w = 1.0;
  if (h <= 0) h = 1.0;
  double pad = 0.05 * std::max(w, h);
  double vx = (b.any ? b.minx : 0.0) - pad;
  double vy = -(b.any ? b.maxy : 1.0) - pad;  // y flipped
  double vw = w + 2 * pad;
  double vh = h + 2 * pad;
  double stroke = 0.005 * std::max(vw, vh);

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + fmt_double(vx) + " " +
         fmt_double(vy) + " " + fmt_double(vw) + " " + fmt_double(vh) + "\">\n";
  for (const auto& f : scene.faces) {
    std::string d;
    ring_path(d, f.outer);
    for (const auto& hole : f.holes) ring_path(d, hole);
    if (!d.empty()) d.pop_back();
    out += "<path d=\"" + d + "\" fill=\"#b9c6d3\" fill-rule=\"evenodd\" stroke=\"#24313f\" stroke-width=\"" +
           fmt_double(stroke) + "\"/>\n";
  }
  for (const auto& poly : edge_polys) {
    std::string d;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      d += i == 0 ? "M " : "L ";
      d += pt(poly[i]);
      if (i + 1 < poly.size()) d += ' ';
    }
    const auto& e = scene.drawing_edges[&poly - edge_polys.data()];
    if (e.kind == geobool::Segment::Kind::Circle) d += " Z";
    out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"#1a1a1a\" stroke-width=\"" +
           fmt_double(stroke) + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace aidl
