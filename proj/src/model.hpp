#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "constraint_spec.hpp"
#include "diagnostics.hpp"
#include "expr.hpp"

namespace aidl {

enum class StructureType : std::uint8_t { Assembly, Solid, Hole, Drawing };
enum class Orientation : std::uint8_t { Top, Front, Side };

const char* structure_type_name(StructureType t);
const char* orientation_name(Orientation o);
std::optional<StructureType> parse_structure_type(const std::string& s);
std::optional<Orientation> parse_orientation(const std::string& s);

enum class ParamRole : std::uint8_t {
  User,      // declared scalar parameter
  PointX,
  PointY,
  Radius,
  FrameTx,
  FrameTy,
  Slack,
  BBoxVirtual,
};

struct ParamMeta {
  std::string name;  // display name within the owner, e.g. "p.x", "width"
  StructureId owner = kNoId;
  ParamRole role = ParamRole::User;
  bool is_mutable = true;
};

struct PointGeo {
  ParamId x, y;
};
struct LineGeo {
  GeoId start, end;  // Points in the same structure
};
struct ArcGeo {
  GeoId center, start, end;  // counter-clockwise sweep from start to end
};
struct CircleGeo {
  GeoId center;
  ParamId radius;
};

enum class CompoundKind : std::uint8_t { Rectangle, Triangle };

struct CompoundMember {
  std::string name;
  enum class Kind : std::uint8_t { Geo, Param, Derived } kind;
  GeoId geo = kNoId;
  ParamId param = kNoId;
  ExprId derived = kNoId;
};

// Compounds decompose into shared points and lines; the record survives as
// the resolution anchor for member paths like rect.top_left and as the
// canonical constructor for formatting.
struct CompoundGeo {
  CompoundKind kind;
  bool flattened = false;
  // Constructor capture (pre-flatten): anchors are existing points or
  // coordinates; scalars are authored doubles.
  std::vector<GeoId> anchor_points;          // shared points given by reference
  std::vector<std::pair<double, double>> anchor_coords;  // literal corners
  bool anchored_by_ref = false;
  bool centered = false;  // Rectangle(center=...) variant
  double w0 = 0, h0 = 0;  // Rectangle extent / Triangle base & height
  std::vector<CompoundMember> members;  // filled by flatten
};

struct Geometry {
  std::string name;
  StructureId owner = kNoId;
  bool synthetic = false;  // created implicitly (inline endpoints, compound parts)
  std::variant<PointGeo, LineGeo, ArcGeo, CircleGeo, CompoundGeo> shape;

  bool is_point() const { return std::holds_alternative<PointGeo>(shape); }
  bool is_line() const { return std::holds_alternative<LineGeo>(shape); }
  bool is_arc() const { return std::holds_alternative<ArcGeo>(shape); }
  bool is_circle() const { return std::holds_alternative<CircleGeo>(shape); }
  bool is_compound() const { return std::holds_alternative<CompoundGeo>(shape); }
};

struct Frame {
  StructureType type = StructureType::Assembly;
  Orientation orientation = Orientation::Top;
  ParamId tx = kNoId, ty = kNoId;  // kNoId for the root
};

struct Structure {
  std::string name;
  Frame frame;
  StructureId parent = kNoId;
  std::vector<StructureId> children;
  std::vector<GeoId> geometry;   // declaration order
  std::vector<ParamId> params;   // declared (User role) parameters
  std::vector<ConstraintSpec> constraints;
  std::vector<LoweredConstraint> lowered;  // populated by finalize_deferred
};

// Deferred min/max expressions over member point coordinates. Sides are in
// the structure's parent frame; width/height are translation-invariant.
struct BBoxInstance {
  StructureId structure = kNoId;
  std::vector<StructureId> exclusion;  // sorted proper descendants
  bool is_virtual = false;
  ExprId left = kNoId, right = kNoId, top = kNoId, bottom = kNoId;
  ExprId width = kNoId, height = kNoId;
  std::vector<ParamId> virtual_params;
};

struct ModelError {
  enum class Kind : std::uint8_t { DuplicateName, IllegalReference, BadArgument };
  Kind kind;
  std::string message;
};

// Resolution result for dotted paths (see resolve_path).
struct Resolved {
  enum class Kind : std::uint8_t { Structure, Geometry, Param, Derived, BBoxSide };
  Kind kind;
  StructureId structure = kNoId;  // Structure / BBoxSide target
  GeoId geo = kNoId;
  ParamId param = kNoId;
  ExprId derived = kNoId;
  BBoxSideKind side = BBoxSideKind::Left;
};

class Model {
 public:
  // --- construction -------------------------------------------------------
  StructureId add_root(const std::string& name, StructureType type,
                       Orientation orientation = Orientation::Top);
  StructureId add_structure(StructureId parent, const std::string& name, StructureType type,
                            Orientation orientation = Orientation::Top, double tx0 = 0,
                            double ty0 = 0);
  GeoId add_point(StructureId owner, const std::string& name, double x0, double y0,
                  bool synthetic = false);
  // Coordinates may share existing parameters of the same structure, which
  // ties the point to them (the implicit-coincidence mechanism).
  GeoId add_point_sharing(StructureId owner, const std::string& name,
                          std::optional<ParamId> shared_x, double x0,
                          std::optional<ParamId> shared_y, double y0);
  GeoId add_line(StructureId owner, const std::string& name, GeoId start, GeoId end,
                 bool synthetic = false);
  GeoId add_arc(StructureId owner, const std::string& name, GeoId center, GeoId start,
                GeoId end);
  GeoId add_circle(StructureId owner, const std::string& name, GeoId center, double radius0);
  GeoId add_circle(StructureId owner, const std::string& name, GeoId center,
                   ParamId shared_radius);
  ParamId add_parameter(StructureId owner, const std::string& name, double value,
                        bool is_mutable = true, ParamRole role = ParamRole::User);
  void add_constraint(StructureId owner, ConstraintSpec spec);

  // Compound constructors register a compound record; flatten_compounds
  // materializes points/lines with shared corner references.
  GeoId add_rectangle(StructureId owner, const std::string& name, double x0, double y0,
                      double w, double h, bool centered = false);
  GeoId add_rectangle(StructureId owner, const std::string& name, GeoId origin_point, double w,
                      double h);
  GeoId add_triangle(StructureId owner, const std::string& name, GeoId pa, GeoId pb, GeoId pc);
  GeoId add_triangle(StructureId owner, const std::string& name,
                     std::span<const std::pair<double, double>> pts);
  GeoId add_triangle(StructureId owner, const std::string& name, double cx, double cy,
                     double base, double height);
  void flatten_compounds(StructureId structure);

  // --- queries ------------------------------------------------------------
  StructureId root() const { return root_; }
  const Structure& structure(StructureId id) const { return structs_[id]; }
  Structure& structure(StructureId id) { return structs_[id]; }
  const Geometry& geo(GeoId id) const { return geos_[id]; }
  std::size_t structure_count() const { return structs_.size(); }
  std::size_t geo_count() const { return geos_.size(); }
  std::size_t param_count() const { return values_.size(); }

  const ParamMeta& param_meta(ParamId id) const { return meta_[id]; }
  double value(ParamId id) const { return values_[id]; }
  void set_value(ParamId id, double v) { values_[id] = v; }
  std::span<const double> values() const { return values_; }
  std::vector<double> snapshot_values() const { return values_; }
  void restore_values(const std::vector<double>& snap) { values_ = snap; }

  ExprPool& pool() { return pool_; }
  const ExprPool& pool() const { return pool_; }

  std::string path_of(StructureId id) const;          // "root.child"
  std::string param_path(ParamId id) const;           // "root.child.p.x"
  bool in_subtree(StructureId node, StructureId root) const;
  int subtree_depth(StructureId id) const;            // 0 for a leaf
  std::vector<StructureId> descendants_at_depth(StructureId root, int depth) const;

  // Member lookup inside one structure's namespace (children, geometry,
  // declared params).
  std::optional<Resolved> find_member(StructureId scope, const std::string& name) const;
  // Dotted-path resolution starting at `scope`; the first segment may also
  // name `scope` itself. Throws ModelError{BadArgument} with a message when a
  // segment does not resolve.
  Resolved resolve_path(StructureId scope, std::span<const std::string> segments);

  // Derived read-only expressions.
  ExprId point_x(GeoId point);
  ExprId point_y(GeoId point);
  ExprId line_length(GeoId line);
  ExprId circle_radius_expr(GeoId circle_or_arc);  // arc radius = |start - center|
  ExprId circle_diameter(GeoId circle_or_arc);

  // Sum of frame translations on the chain from `from` up to (excluding)
  // `ancestor`; Const 0 when from == ancestor.
  std::pair<ExprId, ExprId> offset_to_ancestor(StructureId from, StructureId ancestor);
  // Point coordinates as expressions in an ancestor's frame.
  std::pair<ExprId, ExprId> point_in_frame(GeoId point, StructureId ancestor);

  // --- bounding boxes -----------------------------------------------------
  // Cached per (structure, exclusion set). Empty member-point sets produce a
  // virtual box of four fresh parameters.
  const BBoxInstance& bounding_box(StructureId structure, std::vector<StructureId> exclusion);
  const std::vector<BBoxInstance>& bbox_instances() const { return bbox_instances_; }
  // Side expression lifted into an ancestor frame (Width/Height need no lift).
  ExprId bbox_side_in_frame(const BBoxInstance& box, BBoxSideKind side, StructureId frame);

  // --- validation ---------------------------------------------------------
  std::vector<Diagnostic> validate() const;

  // Parameters referenced by an expression.
  std::vector<ParamId> collect_params(ExprId e) const;

 private:
  void check_sibling_name(StructureId owner, const std::string& name) const;
  void register_name(StructureId owner, const std::string& name, Resolved target);
  GeoId require_point(StructureId owner, GeoId g, const char* what) const;
  void collect_bbox_points(StructureId node, StructureId top,
                           const std::vector<StructureId>& exclusion,
                           std::vector<GeoId>& points);
  void flatten_one(GeoId compound_id);

  ExprPool pool_;
  std::vector<double> values_;
  std::vector<ParamMeta> meta_;
  std::vector<Geometry> geos_;
  std::vector<Structure> structs_;
  StructureId root_ = kNoId;
  std::vector<BBoxInstance> bbox_instances_;
  // per-structure name table (one namespace across entity kinds)
  std::vector<std::vector<std::pair<std::string, Resolved>>> names_;
  int bbox_virtual_counter_ = 0;
};

}  // namespace aidl
