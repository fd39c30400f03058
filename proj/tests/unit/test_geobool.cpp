#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "constraints.hpp"
#include "geobool.hpp"
#include "solver.hpp"

using namespace aidl;
using geobool::Segment;
using geobool::Vec2;

namespace {

Segment line(double x0, double y0, double x1, double y1) {
  Segment s;
  s.kind = Segment::Kind::Line;
  s.a = {x0, y0};
  s.b = {x1, y1};
  return s;
}

}  // namespace

TEST_CASE("discover: four lines close into one square loop") {
  std::vector<Segment> segs{line(0, 0, 1, 0), line(1, 0, 1, 1), line(1, 1, 0, 1),
                            line(0, 1, 0, 0)};
  auto r = geobool::discover_faces(segs, 1e-6);
  CHECK(r.loops.size() == 1);
  CHECK(r.open_chains.empty());
  CHECK(r.loops[0].size() == 4);
}

TEST_CASE("discover: a U stays an open chain") {
  std::vector<Segment> segs{line(0, 1, 0, 0), line(0, 0, 1, 0), line(1, 0, 1, 1)};
  auto r = geobool::discover_faces(segs, 1e-6);
  CHECK(r.loops.empty());
  REQUIRE(r.open_chains.size() == 1);
  CHECK(r.open_chains[0].size() == 3);
}

TEST_CASE("discover: segments chain regardless of authored direction") {
  std::vector<Segment> segs{line(0, 0, 1, 0), line(1, 1, 1, 0), line(1, 1, 0, 1),
                            line(0, 0, 0, 1)};
  auto r = geobool::discover_faces(segs, 1e-6);
  CHECK(r.loops.size() == 1);
  CHECK(r.open_chains.empty());
}

TEST_CASE("discover: full circles are loops by construction") {
  Segment c;
  c.kind = Segment::Kind::Circle;
  c.center = {0, 0};
  c.radius = 2;
  std::vector<Segment> segs{c, line(5, 5, 6, 5)};
  auto r = geobool::discover_faces(segs, 1e-6);
  CHECK(r.loops.size() == 1);
  CHECK(r.open_chains.size() == 1);
}

TEST_CASE("discover: shared corner junction splits into two simple loops") {
  std::vector<Segment> segs{
      line(0, 0, 2, 0), line(2, 0, 2, 2), line(2, 2, 0, 2), line(0, 2, 0, 0),
      line(2, 2, 4, 2), line(4, 2, 4, 4), line(4, 4, 2, 4), line(2, 4, 2, 2),
  };
  auto r = geobool::discover_faces(segs, 1e-6);
  CHECK(r.loops.size() == 2);
  CHECK(r.open_chains.empty());
  for (const auto& loop : r.loops) CHECK(loop.size() == 4);
}

TEST_CASE("tessellate: lines pass through unchanged") {
  Segment s = line(1, 2, 3, 4);
  auto poly = geobool::tessellate(s, 1e-3);
  REQUIRE(poly.size() == 2);
  CHECK(poly[0].x == 1);
  CHECK(poly[1].y == 4);
}

TEST_CASE("tessellate: unit circle meets the chord tolerance with enough vertices") {
  Segment c;
  c.kind = Segment::Kind::Circle;
  c.center = {0, 0};
  c.radius = 1;
  auto ring = geobool::tessellate(c, 1e-3);
  // n >= ceil(pi / acos(1 - tol))
  int min_n = static_cast<int>(std::ceil(std::numbers::pi / std::acos(1.0 - 1e-3)));
  CHECK(static_cast<int>(ring.size()) >= min_n);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % ring.size()];
    Vec2 mid{(p.x + q.x) / 2, (p.y + q.y) / 2};
    double sagitta = 1.0 - std::hypot(mid.x, mid.y);
    CHECK(sagitta <= 1e-3 + 1e-12);
    CHECK(std::hypot(p.x, p.y) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("tessellate: quarter arc keeps its endpoints bit-exactly") {
  Segment a;
  a.kind = Segment::Kind::Arc;
  a.center = {0, 0};
  a.a = {2, 0};
  a.b = {0, 2};
  auto poly = geobool::tessellate(a, 1e-3);
  REQUIRE(poly.size() >= 2);
  CHECK(std::memcmp(&poly.front().x, &a.a.x, sizeof(double)) == 0);
  CHECK(std::memcmp(&poly.front().y, &a.a.y, sizeof(double)) == 0);
  CHECK(std::memcmp(&poly.back().x, &a.b.x, sizeof(double)) == 0);
  CHECK(std::memcmp(&poly.back().y, &a.b.y, sizeof(double)) == 0);
  // sagitta bound along the arc
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    Vec2 mid{(poly[i].x + poly[i + 1].x) / 2, (poly[i].y + poly[i + 1].y) / 2};
    CHECK(2.0 - std::hypot(mid.x, mid.y) <= 1e-3 + 1e-12);
  }
}

namespace {

Model square_with_hole() {
  Model m;
  StructureId root = m.add_root("plate", StructureType::Solid);
  m.add_rectangle(root, "body", 0, 0, 10, 10);
  StructureId hole = m.add_structure(root, "bore", StructureType::Hole);
  GeoId c = m.add_point(hole, "c", 5, 5);
  m.add_circle(hole, "k", c, 2.0);
  m.flatten_compounds(root);
  return m;
}

}  // namespace

TEST_CASE("scene: solid square minus hole circle") {
  Model m = square_with_hole();
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  REQUIRE(scene.faces.size() == 1);
  REQUIRE(scene.faces[0].holes.size() == 1);
  double expected = 100.0 - 4.0 * std::numbers::pi;
  CHECK(geobool::scene_area(scene) == doctest::Approx(expected).epsilon(5e-4));
  // orientation contract: outer ccw, holes cw
  CHECK(geobool::ring_area(scene.faces[0].outer) > 0);
  CHECK(geobool::ring_area(scene.faces[0].holes[0]) < 0);
}

TEST_CASE("scene: nested loops in one sketch resolve even-odd") {
  Model m;
  StructureId root = m.add_root("s", StructureType::Solid);
  m.add_rectangle(root, "outer", 0, 0, 10, 10);
  GeoId c = m.add_point(root, "c", 5, 5);
  m.add_circle(root, "inner", c, 2.0);
  m.flatten_compounds(root);
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  REQUIRE(scene.faces.size() == 1);
  CHECK(scene.faces[0].holes.size() == 1);
  CHECK(geobool::scene_area(scene) ==
        doctest::Approx(100.0 - 4.0 * std::numbers::pi).epsilon(5e-4));
}

TEST_CASE("scene: solid with no hole children keeps its discovered faces") {
  Model m;
  StructureId root = m.add_root("s", StructureType::Solid);
  m.add_rectangle(root, "r", 0, 0, 4, 2);
  m.flatten_compounds(root);
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  REQUIRE(scene.faces.size() == 1);
  CHECK(scene.faces[0].holes.empty());
  CHECK(geobool::scene_area(scene) == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("scene: assembly children do not interact") {
  Model m;
  StructureId root = m.add_root("asm", StructureType::Assembly);
  StructureId a = m.add_structure(root, "a", StructureType::Solid);
  StructureId b = m.add_structure(root, "b", StructureType::Solid, Orientation::Top, 20, 0);
  m.add_rectangle(a, "ra", 0, 0, 4, 4);
  m.add_rectangle(b, "rb", 0, 0, 4, 4);
  m.flatten_compounds(root);
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  REQUIRE(scene.faces.size() == 2);
  CHECK(scene.faces[0].provenance != scene.faces[1].provenance);
  CHECK(geobool::scene_area(scene) == doctest::Approx(32.0).epsilon(1e-9));
}

TEST_CASE("scene: open chains in solids produce warnings, not faces") {
  Model m;
  StructureId root = m.add_root("s", StructureType::Solid);
  GeoId p1 = m.add_point(root, "p1", 0, 1);
  GeoId p2 = m.add_point(root, "p2", 0, 0);
  GeoId p3 = m.add_point(root, "p3", 1, 0);
  m.add_line(root, "l1", p1, p2);
  m.add_line(root, "l2", p2, p3);
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  CHECK(scene.faces.empty());
  REQUIRE_FALSE(scene.warnings.empty());
  CHECK(scene.warnings[0].code == "W0001");
}

TEST_CASE("scene: drawing geometry passes through bit-identically") {
  Model m;
  StructureId root = m.add_root("sheet", StructureType::Assembly);
  StructureId marks = m.add_structure(root, "marks", StructureType::Drawing,
                                      Orientation::Top, 2.5, 0.125);
  GeoId p1 = m.add_point(marks, "p1", 0.1, 0.2);
  GeoId p2 = m.add_point(marks, "p2", 0.3, 0.7);
  m.add_line(marks, "tick", p1, p2);
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  REQUIRE(scene.faces.empty());
  REQUIRE(scene.drawing_edges.size() == 1);
  geobool::Vec2 off = geobool::world_offset(m, marks);
  double ax = m.value(std::get<PointGeo>(m.geo(p1).shape).x) + off.x;
  double ay = m.value(std::get<PointGeo>(m.geo(p1).shape).y) + off.y;
  CHECK(std::memcmp(&scene.drawing_edges[0].a.x, &ax, sizeof(double)) == 0);
  CHECK(std::memcmp(&scene.drawing_edges[0].a.y, &ay, sizeof(double)) == 0);
}

TEST_CASE("scene: hole under an assembly is ignored with a warning") {
  Model m;
  StructureId root = m.add_root("asm", StructureType::Assembly);
  StructureId h = m.add_structure(root, "h", StructureType::Hole);
  GeoId c = m.add_point(h, "c", 0, 0);
  m.add_circle(h, "k", c, 1.0);
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  CHECK(scene.faces.empty());
  bool warned = false;
  for (const auto& w : scene.warnings)
    if (w.code == "W0002") warned = true;
  CHECK(warned);
}

TEST_CASE("scene: conservation without holes") {
  // two overlapping solid squares union to the exact covered area
  Model m;
  StructureId root = m.add_root("s", StructureType::Solid);
  StructureId a = m.add_structure(root, "a", StructureType::Solid);
  StructureId b = m.add_structure(root, "b", StructureType::Solid, Orientation::Top, 2, 0);
  m.add_rectangle(a, "ra", 0, 0, 4, 4);
  m.add_rectangle(b, "rb", 0, 0, 4, 4);
  m.flatten_compounds(root);
  geobool::GeoboolConfig cfg;
  auto scene = geobool::build_scene(m, cfg);
  // union of [0,4]x[0,4] and [2,6]x[0,4]
  CHECK(geobool::scene_area(scene) == doctest::Approx(24.0).epsilon(1e-9));
}
