#include "geobool.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace aidl::geobool {

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPoint, false, true>;  // ccw, closed
using BMulti = bg::model::multi_polygon<BPoly>;

Vec2 world_offset(const Model& m, StructureId s) {
  // accumulate root -> node so composition order is reproducible
  std::vector<StructureId> chain;
  for (StructureId cur = s; cur != kNoId; cur = m.structure(cur).parent) chain.push_back(cur);
  Vec2 off;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Frame& f = m.structure(*it).frame;
    if (f.tx == kNoId) continue;
    off.x += m.value(f.tx);
    off.y += m.value(f.ty);
  }
  return off;
}

std::vector<Segment> collect_segments(const Model& m, StructureId s) {
  std::vector<Segment> out;
  Vec2 off = world_offset(m, s);
  auto pt = [&](GeoId p) {
    const auto& pg = std::get<PointGeo>(m.geo(p).shape);
    return Vec2{m.value(pg.x) + off.x, m.value(pg.y) + off.y};
  };
  for (GeoId gid : m.structure(s).geometry) {
    const Geometry& g = m.geo(gid);
    if (g.is_line()) {
      const auto& l = std::get<LineGeo>(g.shape);
      Segment seg;
      seg.kind = Segment::Kind::Line;
      seg.a = pt(l.start);
      seg.b = pt(l.end);
      seg.owner = s;
      out.push_back(seg);
    } else if (g.is_arc()) {
      const auto& a = std::get<ArcGeo>(g.shape);
      Segment seg;
      seg.kind = Segment::Kind::Arc;
      seg.center = pt(a.center);
      seg.a = pt(a.start);
      seg.b = pt(a.end);
      seg.owner = s;
      out.push_back(seg);
    } else if (g.is_circle()) {
      const auto& ci = std::get<CircleGeo>(g.shape);
      Segment seg;
      seg.kind = Segment::Kind::Circle;
      seg.center = pt(ci.center);
      seg.radius = m.value(ci.radius);
      seg.owner = s;
      out.push_back(seg);
    }
  }
  return out;
}

namespace {

double dist(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Vec2 seg_end(const Segment& s, bool reversed, bool far_end) {
  // travel direction: a -> b when not reversed
  bool want_b = !reversed == far_end;
  return want_b ? s.b : s.a;
}

// unit-free travel tangent at one end of a segment
Vec2 travel_tangent(const Segment& s, bool reversed, bool at_far_end) {
  if (s.kind == Segment::Kind::Line) {
    Vec2 d{s.b.x - s.a.x, s.b.y - s.a.y};
    if (reversed) return {-d.x, -d.y};
    return d;
  }
  // arc: ccw tangent at p is rot90ccw(p - center); reversed travel flips it
  Vec2 p = seg_end(s, reversed, at_far_end);
  Vec2 r{p.x - s.center.x, p.y - s.center.y};
  Vec2 t{-r.y, r.x};
  if (reversed) return {-t.x, -t.y};
  return t;
}

}  // namespace

DiscoverResult discover_faces(const std::vector<Segment>& segments, double tol_join) {
  DiscoverResult result;
  const std::size_t n = segments.size();
  std::vector<char> used(n, 0);

  // circles are loops on their own
  for (std::size_t i = 0; i < n; ++i)
    if (segments[i].kind == Segment::Kind::Circle) {
      result.loops.push_back({{i, false}});
      used[i] = 1;
    }

  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    std::vector<ChainLink> chain{{i, false}};
    used[i] = 1;
    Vec2 start = seg_end(segments[i], false, false);
    Vec2 cur = seg_end(segments[i], false, true);
    bool closed = false;
    bool extended_backwards = false;

    while (true) {
      if (dist(cur, start) <= tol_join && chain.size() >= 2) {
        closed = true;
        break;
      }
      // candidate continuations at the current chain end
      struct Cand {
        std::size_t j;
        bool rev;
      };
      std::vector<Cand> cands;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j] || segments[j].kind == Segment::Kind::Circle) continue;
        if (dist(segments[j].a, cur) <= tol_join) cands.push_back({j, false});
        else if (dist(segments[j].b, cur) <= tol_join) cands.push_back({j, true});
      }
      if (cands.empty()) {
        if (!extended_backwards) {
          // flip the whole chain and grow the other end
          extended_backwards = true;
          std::reverse(chain.begin(), chain.end());
          for (auto& link : chain) link.reversed = !link.reversed;
          std::swap(start, cur);
          continue;
        }
        break;  // open chain
      }
      std::size_t pick = 0;
      if (cands.size() > 1) {
        const ChainLink& last = chain.back();
        Vec2 din = travel_tangent(segments[last.segment], last.reversed, true);
        double best = -1e9;
        for (std::size_t k = 0; k < cands.size(); ++k) {
          Vec2 dout = travel_tangent(segments[cands[k].j], cands[k].rev, false);
          double turn = std::atan2(din.x * dout.y - din.y * dout.x,
                                   din.x * dout.x + din.y * dout.y);
          if (turn > best + 1e-12) {
            best = turn;
            pick = k;
          }
        }
      }
      chain.push_back({cands[pick].j, cands[pick].rev});
      used[cands[pick].j] = 1;
      cur = seg_end(segments[cands[pick].j], cands[pick].rev, true);
    }
    if (closed) result.loops.push_back(std::move(chain));
    else result.open_chains.push_back(std::move(chain));
  }
  return result;
}

std::vector<Vec2> tessellate(const Segment& seg, double chord_tol) {
  if (seg.kind == Segment::Kind::Line) return {seg.a, seg.b};

  auto max_step = [&](double r) {
    if (r <= chord_tol) return std::numbers::pi / 2;
    double c = 1.0 - chord_tol / r;
    return 2.0 * std::acos(std::max(-1.0, c));
  };

  if (seg.kind == Segment::Kind::Circle) {
    double r = seg.radius;
    int n = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi / max_step(r))));
    std::vector<Vec2> ring(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      double th = 2.0 * std::numbers::pi * k / n;
      ring[static_cast<std::size_t>(k)] = {seg.center.x + r * std::cos(th),
                                           seg.center.y + r * std::sin(th)};
    }
    return ring;
  }

  // arc, ccw sweep a -> b
  double r = dist(seg.a, seg.center);
  double th0 = std::atan2(seg.a.y - seg.center.y, seg.a.x - seg.center.x);
  double th1 = std::atan2(seg.b.y - seg.center.y, seg.b.x - seg.center.x);
  double sweep = th1 - th0;
  while (sweep <= 0) sweep += 2.0 * std::numbers::pi;
  while (sweep > 2.0 * std::numbers::pi) sweep -= 2.0 * std::numbers::pi;
  if (r < 1e-12) return {seg.a, seg.b};
  int n = std::max(1, static_cast<int>(std::ceil(sweep / max_step(r))));
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  out.push_back(seg.a);
  for (int k = 1; k < n; ++k) {
    double th = th0 + sweep * k / n;
    out.push_back({seg.center.x + r * std::cos(th), seg.center.y + r * std::sin(th)});
  }
  out.push_back(seg.b);  // exact endpoint
  return out;
}

Ring loop_ring(const std::vector<Segment>& segments, const std::vector<ChainLink>& loop,
               double chord_tol) {
  Ring ring;
  for (const ChainLink& link : loop) {
    std::vector<Vec2> poly = tessellate(segments[link.segment], chord_tol);
    if (link.reversed) std::reverse(poly.begin(), poly.end());
    if (segments[link.segment].kind == Segment::Kind::Circle) return poly;
    // drop the joint vertex duplicated by the previous segment
    std::size_t from = ring.empty() ? 0 : 1;
    for (std::size_t k = from; k < poly.size(); ++k) ring.push_back(poly[k]);
  }
  if (!ring.empty() && dist(ring.front(), ring.back()) <= chord_tol + 1e-9)
    ring.pop_back();  // closing vertex is implicit
  return ring;
}

double ring_area(const Ring& r) {
  double acc = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Vec2& p = r[i];
    const Vec2& q = r[(i + 1) % r.size()];
    acc += p.x * q.y - q.x * p.y;
  }
  return acc / 2;
}

namespace {

BPoly to_poly(const Ring& ring) {
  BPoly poly;
  for (const Vec2& p : ring) bg::append(poly.outer(), BPoint(p.x, p.y));
  if (!ring.empty()) bg::append(poly.outer(), BPoint(ring[0].x, ring[0].y));
  bg::correct(poly);
  return poly;
}

Ring from_bg_ring(const BPoly::ring_type& ring) {
  Ring out;
  // boost keeps an explicit closing point
  std::size_t n = ring.size();
  if (n > 1) --n;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({bg::get<0>(ring[i]), bg::get<1>(ring[i])});
  return out;
}

struct SceneBuilder {
  const Model& m;
  const GeoboolConfig& cfg;
  std::vector<Diagnostic>& warnings;

  void warn(const std::string& code, Severity sev, StructureId at, const std::string& msg) {
    Diagnostic d;
    d.code = code;
    d.severity = sev;
    d.message = msg;
    d.path = m.path_of(at);
    warnings.push_back(std::move(d));
  }

  BMulti face_multi(const std::vector<Face>& faces) {
    BMulti out;
    for (const Face& f : faces) {
      BPoly poly = to_poly(f.outer);
      for (const Ring& h : f.holes) {
        poly.inners().emplace_back();
        for (const Vec2& p : h) bg::append(poly.inners().back(), BPoint(p.x, p.y));
        if (!h.empty()) bg::append(poly.inners().back(), BPoint(h[0].x, h[0].y));
      }
      bg::correct(poly);
      out.push_back(std::move(poly));
    }
    return out;
  }

  std::vector<Face> multi_faces(const BMulti& multi, StructureId at) {
    std::vector<Face> out;
    for (const BPoly& poly : multi) {
      Face f;
      f.outer = from_bg_ring(poly.outer());
      for (const auto& inner : poly.inners()) f.holes.push_back(from_bg_ring(inner));
      f.provenance = m.path_of(at);
      if (f.outer.size() >= 3) out.push_back(std::move(f));
    }
    return out;
  }

  // even-odd arrangement of one structure's own loops
  BMulti own_faces(StructureId s) {
    BMulti acc;
    auto segments = collect_segments(m, s);
    DiscoverResult disc = discover_faces(segments, cfg.join_tol);
    for (const auto& chain : disc.open_chains) {
      warn("W0001", Severity::Warning, s,
           "open curve chain of " + std::to_string(chain.size()) +
               " segment(s) does not bound a face");
    }
    for (const auto& loop : disc.loops) {
      Ring ring = loop_ring(segments, loop, cfg.chord_tol);
      if (ring.size() < 3) continue;
      BPoly poly = to_poly(ring);
      if (!bg::is_valid(poly)) {
        bg::correct(poly);
        if (!bg::is_valid(poly)) {
          warn("E0013", Severity::Error, s, "face loop self-intersects beyond repair");
          continue;
        }
      }
      try {
        BMulti next;
        bg::sym_difference(acc, poly, next);
        acc = std::move(next);
      } catch (const std::exception& e) {
        warn("E0013", Severity::Error, s, std::string("boolean failure: ") + e.what());
      }
    }
    return acc;
  }

  SceneOutput visit(StructureId s) {
    SceneOutput out;
    const Structure& st = m.structure(s);
    std::vector<SceneOutput> child_outs;
    child_outs.reserve(st.children.size());
    for (StructureId c : st.children) child_outs.push_back(visit(c));

    // drawing edges always bubble up unmodified
    if (st.frame.type == StructureType::Drawing) {
      auto own = collect_segments(m, s);
      out.drawing_edges.insert(out.drawing_edges.end(), own.begin(), own.end());
    }
    for (auto& co : child_outs)
      out.drawing_edges.insert(out.drawing_edges.end(), co.drawing_edges.begin(),
                               co.drawing_edges.end());

    switch (st.frame.type) {
      case StructureType::Drawing:
        // geometry is edges; child faces pass through
        for (auto& co : child_outs)
          out.faces.insert(out.faces.end(), co.faces.begin(), co.faces.end());
        break;
      case StructureType::Assembly: {
        BMulti own = own_faces(s);
        auto faces = multi_faces(own, s);
        out.faces.insert(out.faces.end(), faces.begin(), faces.end());
        for (std::size_t i = 0; i < st.children.size(); ++i) {
          if (m.structure(st.children[i]).frame.type == StructureType::Hole) {
            if (!child_outs[i].faces.empty())
              warn("W0002", Severity::Warning, st.children[i],
                   "Hole structure under an Assembly has nothing to subtract from");
            continue;
          }
          out.faces.insert(out.faces.end(), child_outs[i].faces.begin(),
                           child_outs[i].faces.end());
        }
        break;
      }
      case StructureType::Solid:
      case StructureType::Hole: {
        BMulti acc = own_faces(s);
        // union with Solid children first, then subtract Hole children
        for (std::size_t i = 0; i < st.children.size(); ++i) {
          if (m.structure(st.children[i]).frame.type != StructureType::Solid) continue;
          try {
            BMulti next;
            bg::union_(acc, face_multi(child_outs[i].faces), next);
            acc = std::move(next);
          } catch (const std::exception& e) {
            warn("E0013", Severity::Error, s, std::string("boolean failure: ") + e.what());
          }
        }
        for (std::size_t i = 0; i < st.children.size(); ++i) {
          if (m.structure(st.children[i]).frame.type != StructureType::Hole) continue;
          try {
            BMulti next;
            bg::difference(acc, face_multi(child_outs[i].faces), next);
            acc = std::move(next);
          } catch (const std::exception& e) {
            warn("E0013", Severity::Error, s, std::string("boolean failure: ") + e.what());
          }
        }
        auto faces = multi_faces(acc, s);
        out.faces.insert(out.faces.end(), faces.begin(), faces.end());
        // Assembly children do not boolean-interact; their output passes through
        for (std::size_t i = 0; i < st.children.size(); ++i) {
          StructureType ct = m.structure(st.children[i]).frame.type;
          if (ct == StructureType::Assembly || ct == StructureType::Drawing)
            out.faces.insert(out.faces.end(), child_outs[i].faces.begin(),
                             child_outs[i].faces.end());
        }
        break;
      }
    }
    return out;
  }
};

}  // namespace

SceneOutput build_scene(const Model& m, const GeoboolConfig& cfg) {
  SceneOutput out;
  if (m.root() == kNoId) return out;
  std::vector<Diagnostic> warnings;
  SceneBuilder builder{m, cfg, warnings};
  out = builder.visit(m.root());
  out.warnings = std::move(warnings);
  return out;
}

double scene_area(const SceneOutput& scene) {
  double total = 0;
  for (const Face& f : scene.faces) {
    total += std::fabs(ring_area(f.outer));
    for (const Ring& h : f.holes) total -= std::fabs(ring_area(h));
  }
  return total;
}

}  // namespace aidl::geobool
