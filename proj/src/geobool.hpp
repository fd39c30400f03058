#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "model.hpp"

namespace aidl::geobool {

struct Vec2 {
  double x = 0, y = 0;
};

// Solved curve segment in world frame coordinates.
struct Segment {
  enum class Kind : std::uint8_t { Line, Arc, Circle } kind = Kind::Line;
  Vec2 a, b;       // line endpoints / arc start and end (arcs sweep ccw a -> b)
  Vec2 center;     // arc, circle
  double radius = 0;  // circle only; arc radius derives from |a - center|
  StructureId owner = kNoId;
};

using Ring = std::vector<Vec2>;  // implicit closing edge last -> first

struct Face {
  Ring outer;               // counter-clockwise (positive signed area)
  std::vector<Ring> holes;  // clockwise
  std::string provenance;   // path of the structure whose boolean produced it
};

struct SceneOutput {
  std::vector<Face> faces;
  std::vector<Segment> drawing_edges;  // pass-through, endpoints untouched
  std::vector<Diagnostic> warnings;
};

struct GeoboolConfig {
  double chord_tol = 1e-3;  // max chord deviation when tessellating curves
  double join_tol = 1e-6;   // endpoint matching distance
};

// Sum of frame translations from the root down to `s`.
Vec2 world_offset(const Model& m, StructureId s);

// Curve segments of one structure's own sketch (points and compounds carry no
// curves of their own).
std::vector<Segment> collect_segments(const Model& m, StructureId s);

// One entry per segment of a chain; `reversed` flips the travel direction.
struct ChainLink {
  std::size_t segment = 0;
  bool reversed = false;
};

struct DiscoverResult {
  std::vector<std::vector<ChainLink>> loops;
  std::vector<std::vector<ChainLink>> open_chains;
};

// Endpoint-matches segments into maximal chains. At junctions of degree > 2
// the leftmost-turn continuation is taken so simple loops come out. Full
// circles are loops by construction and are excluded from chaining.
DiscoverResult discover_faces(const std::vector<Segment>& segments, double tol_join);

// Polyline approximation with max chord deviation <= chord_tol; line segments
// pass through; arc and circle endpoints are preserved exactly.
std::vector<Vec2> tessellate(const Segment& seg, double chord_tol);

// Tessellated ring of one discovered loop.
Ring loop_ring(const std::vector<Segment>& segments, const std::vector<ChainLink>& loop,
               double chord_tol);

double ring_area(const Ring& r);  // signed (shoelace)

// Full post-order boolean pass over a solved model.
SceneOutput build_scene(const Model& m, const GeoboolConfig& cfg);

double scene_area(const SceneOutput& scene);

}  // namespace aidl::geobool
