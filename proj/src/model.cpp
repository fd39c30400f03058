#include "model.hpp"

#include <algorithm>
#include <cmath>

#include "constraints.hpp"

namespace aidl {

const char* structure_type_name(StructureType t) {
  switch (t) {
    case StructureType::Assembly: return "Assembly";
    case StructureType::Solid: return "Solid";
    case StructureType::Hole: return "Hole";
    case StructureType::Drawing: return "Drawing";
  }
  return "?";
}

const char* orientation_name(Orientation o) {
  switch (o) {
    case Orientation::Top: return "Top";
    case Orientation::Front: return "Front";
    case Orientation::Side: return "Side";
  }
  return "?";
}

std::optional<StructureType> parse_structure_type(const std::string& s) {
  if (s == "Assembly") return StructureType::Assembly;
  if (s == "Solid") return StructureType::Solid;
  if (s == "Hole") return StructureType::Hole;
  if (s == "Drawing") return StructureType::Drawing;
  return std::nullopt;
}

std::optional<Orientation> parse_orientation(const std::string& s) {
  if (s == "Top") return Orientation::Top;
  if (s == "Front") return Orientation::Front;
  if (s == "Side") return Orientation::Side;
  return std::nullopt;
}

const char* bbox_side_name(BBoxSideKind k) {
  switch (k) {
    case BBoxSideKind::Left: return "left";
    case BBoxSideKind::Right: return "right";
    case BBoxSideKind::Top: return "top";
    case BBoxSideKind::Bottom: return "bottom";
    case BBoxSideKind::Width: return "width";
    case BBoxSideKind::Height: return "height";
  }
  return "?";
}

SurfExprPtr SurfExpr::constant(double v) {
  auto e = std::make_shared<SurfExpr>();
  e->kind = Kind::Const;
  e->value = v;
  return e;
}
SurfExprPtr SurfExpr::wrap(ExprId id) {
  auto e = std::make_shared<SurfExpr>();
  e->kind = Kind::Expr;
  e->expr = id;
  return e;
}
SurfExprPtr SurfExpr::bbox(StructureId s, BBoxSideKind side) {
  auto e = std::make_shared<SurfExpr>();
  e->kind = Kind::BBoxSide;
  e->bb_struct = s;
  e->side = side;
  return e;
}
SurfExprPtr SurfExpr::unary(UnaryOp op, SurfExprPtr x) {
  auto e = std::make_shared<SurfExpr>();
  e->kind = Kind::Unary;
  e->uop = op;
  e->a = std::move(x);
  return e;
}
SurfExprPtr SurfExpr::binary(BinaryOp op, SurfExprPtr l, SurfExprPtr r) {
  auto e = std::make_shared<SurfExpr>();
  e->kind = Kind::Binary;
  e->bop = op;
  e->a = std::move(l);
  e->b = std::move(r);
  return e;
}
SurfExprPtr SurfExpr::compare(CmpOp op, SurfExprPtr l, SurfExprPtr r) {
  auto e = std::make_shared<SurfExpr>();
  e->kind = Kind::Cmp;
  e->cmp = op;
  e->a = std::move(l);
  e->b = std::move(r);
  return e;
}
SurfExprPtr SurfExpr::conjunction(SurfExprPtr l, SurfExprPtr r) {
  auto e = std::make_shared<SurfExpr>();
  e->kind = Kind::And;
  e->a = std::move(l);
  e->b = std::move(r);
  return e;
}

// --- builders --------------------------------------------------------------

void Model::check_sibling_name(StructureId owner, const std::string& name) const {
  if (name.find('.') != std::string::npos) return;  // synthetic dotted names
  for (const auto& [n, _] : names_[owner])
    if (n == name)
      throw ModelError{ModelError::Kind::DuplicateName,
                       "name '" + name + "' already used in structure '" + path_of(owner) + "'"};
}

void Model::register_name(StructureId owner, const std::string& name, Resolved target) {
  if (name.find('.') != std::string::npos) return;
  names_[owner].push_back({name, target});
}

StructureId Model::add_root(const std::string& name, StructureType type,
                            Orientation orientation) {
  if (root_ != kNoId)
    throw ModelError{ModelError::Kind::BadArgument, "model already has a root structure"};
  Structure s;
  s.name = name;
  s.frame.type = type;
  s.frame.orientation = orientation;
  root_ = static_cast<StructureId>(structs_.size());
  structs_.push_back(std::move(s));
  names_.emplace_back();
  return root_;
}

StructureId Model::add_structure(StructureId parent, const std::string& name,
                                 StructureType type, Orientation orientation, double tx0,
                                 double ty0) {
  check_sibling_name(parent, name);
  StructureId id = static_cast<StructureId>(structs_.size());
  Structure s;
  s.name = name;
  s.parent = parent;
  s.frame.type = type;
  s.frame.orientation = orientation;
  s.frame.tx = add_parameter(id, "__frame.tx", tx0, true, ParamRole::FrameTx);
  s.frame.ty = add_parameter(id, "__frame.ty", ty0, true, ParamRole::FrameTy);
  structs_.push_back(std::move(s));
  names_.emplace_back();
  structs_[parent].children.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Structure;
  r.structure = id;
  register_name(parent, name, r);
  return id;
}

ParamId Model::add_parameter(StructureId owner, const std::string& name, double value,
                             bool is_mutable, ParamRole role) {
  if (role == ParamRole::User) {
    check_sibling_name(owner, name);
  }
  ParamId id = static_cast<ParamId>(values_.size());
  values_.push_back(value);
  meta_.push_back({name, owner, role, is_mutable});
  if (owner < structs_.size() && role == ParamRole::User) {
    structs_[owner].params.push_back(id);
    Resolved r;
    r.kind = Resolved::Kind::Param;
    r.param = id;
    register_name(owner, name, r);
  }
  return id;
}

GeoId Model::add_point(StructureId owner, const std::string& name, double x0, double y0,
                       bool synthetic) {
  check_sibling_name(owner, name);
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  g.synthetic = synthetic;
  PointGeo p;
  p.x = add_parameter(owner, name + ".x", x0, true, ParamRole::PointX);
  p.y = add_parameter(owner, name + ".y", y0, true, ParamRole::PointY);
  g.shape = p;
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::add_point_sharing(StructureId owner, const std::string& name,
                               std::optional<ParamId> shared_x, double x0,
                               std::optional<ParamId> shared_y, double y0) {
  check_sibling_name(owner, name);
  auto coord = [&](std::optional<ParamId> shared, double v, const char* suffix) {
    if (!shared) return add_parameter(owner, name + suffix, v, true,
                                      suffix[1] == 'x' ? ParamRole::PointX : ParamRole::PointY);
    if (*shared >= values_.size() || meta_[*shared].owner != owner)
      throw ModelError{ModelError::Kind::IllegalReference,
                       "point coordinate must share a parameter of the same structure"};
    return *shared;
  };
  ParamId px = coord(shared_x, x0, ".x");
  ParamId py = coord(shared_y, y0, ".y");
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  g.shape = PointGeo{px, py};
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::require_point(StructureId owner, GeoId g, const char* what) const {
  if (g >= geos_.size() || !geos_[g].is_point())
    throw ModelError{ModelError::Kind::IllegalReference,
                     std::string(what) + " must reference a Point"};
  if (geos_[g].owner != owner)
    throw ModelError{ModelError::Kind::IllegalReference,
                     std::string(what) + " references point '" + geos_[g].name +
                         "' owned by another structure"};
  return g;
}

GeoId Model::add_line(StructureId owner, const std::string& name, GeoId start, GeoId end,
                      bool synthetic) {
  check_sibling_name(owner, name);
  require_point(owner, start, "line start");
  require_point(owner, end, "line end");
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  g.synthetic = synthetic;
  g.shape = LineGeo{start, end};
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::add_arc(StructureId owner, const std::string& name, GeoId center, GeoId start,
                     GeoId end) {
  check_sibling_name(owner, name);
  require_point(owner, center, "arc center");
  require_point(owner, start, "arc start");
  require_point(owner, end, "arc end");
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  g.shape = ArcGeo{center, start, end};
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::add_circle(StructureId owner, const std::string& name, GeoId center,
                        double radius0) {
  ParamId r = add_parameter(owner, name + ".radius", radius0, true, ParamRole::Radius);
  return add_circle(owner, name, center, r);
}

GeoId Model::add_circle(StructureId owner, const std::string& name, GeoId center,
                        ParamId shared_radius) {
  check_sibling_name(owner, name);
  require_point(owner, center, "circle center");
  if (shared_radius >= values_.size() || meta_[shared_radius].owner != owner)
    throw ModelError{ModelError::Kind::IllegalReference,
                     "circle radius must be a parameter of the same structure"};
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  g.shape = CircleGeo{center, shared_radius};
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

void Model::add_constraint(StructureId owner, ConstraintSpec spec) {
  spec.owner = owner;
  structs_[owner].constraints.push_back(std::move(spec));
}

GeoId Model::add_rectangle(StructureId owner, const std::string& name, double x0, double y0,
                           double w, double h, bool centered) {
  check_sibling_name(owner, name);
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  CompoundGeo c;
  c.kind = CompoundKind::Rectangle;
  c.anchor_coords.push_back({x0, y0});
  c.centered = centered;
  c.w0 = w;
  c.h0 = h;
  g.shape = std::move(c);
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::add_rectangle(StructureId owner, const std::string& name, GeoId origin_point,
                           double w, double h) {
  check_sibling_name(owner, name);
  require_point(owner, origin_point, "rectangle origin");
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  CompoundGeo c;
  c.kind = CompoundKind::Rectangle;
  c.anchor_points.push_back(origin_point);
  c.anchored_by_ref = true;
  c.w0 = w;
  c.h0 = h;
  g.shape = std::move(c);
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::add_triangle(StructureId owner, const std::string& name, GeoId pa, GeoId pb,
                          GeoId pc) {
  check_sibling_name(owner, name);
  require_point(owner, pa, "triangle pt_a");
  require_point(owner, pb, "triangle pt_b");
  require_point(owner, pc, "triangle pt_c");
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  CompoundGeo c;
  c.kind = CompoundKind::Triangle;
  c.anchor_points = {pa, pb, pc};
  c.anchored_by_ref = true;
  g.shape = std::move(c);
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::add_triangle(StructureId owner, const std::string& name,
                          std::span<const std::pair<double, double>> pts) {
  if (pts.size() != 3)
    throw ModelError{ModelError::Kind::BadArgument, "triangle needs exactly three points"};
  check_sibling_name(owner, name);
  GeoId id = static_cast<GeoId>(geos_.size());
  Geometry g;
  g.name = name;
  g.owner = owner;
  CompoundGeo c;
  c.kind = CompoundKind::Triangle;
  c.anchor_coords.assign(pts.begin(), pts.end());
  g.shape = std::move(c);
  geos_.push_back(std::move(g));
  structs_[owner].geometry.push_back(id);
  Resolved r;
  r.kind = Resolved::Kind::Geometry;
  r.geo = id;
  register_name(owner, name, r);
  return id;
}

GeoId Model::add_triangle(StructureId owner, const std::string& name, double cx, double cy,
                          double base, double height) {
  // Isoceles layout: base edge centered under the apex.
  std::pair<double, double> pts[3] = {
      {cx - base / 2, cy - height / 2},
      {cx + base / 2, cy - height / 2},
      {cx, cy + height / 2},
  };
  return add_triangle(owner, name, std::span<const std::pair<double, double>>(pts, 3));
}

void Model::flatten_one(GeoId compound_id) {
  Geometry& g = geos_[compound_id];
  auto& c = std::get<CompoundGeo>(g.shape);
  if (c.flattened) return;
  StructureId owner = g.owner;
  const std::string base = g.name;

  auto member_geo = [&](const std::string& n, GeoId mg) {
    CompoundMember m;
    m.name = n;
    m.kind = CompoundMember::Kind::Geo;
    m.geo = mg;
    return m;
  };
  auto member_derived = [&](const std::string& n, ExprId e) {
    CompoundMember m;
    m.name = n;
    m.kind = CompoundMember::Kind::Derived;
    m.derived = e;
    return m;
  };

  if (c.kind == CompoundKind::Rectangle) {
    double x0, y0;
    GeoId bl;
    if (c.anchored_by_ref) {
      bl = c.anchor_points[0];
      x0 = values_[std::get<PointGeo>(geos_[bl].shape).x];
      y0 = values_[std::get<PointGeo>(geos_[bl].shape).y];
    } else {
      x0 = c.anchor_coords[0].first;
      y0 = c.anchor_coords[0].second;
      if (c.centered) {
        x0 -= c.w0 / 2;
        y0 -= c.h0 / 2;
      }
      bl = add_point(owner, base + ".bottom_left", x0, y0, true);
    }
    GeoId br = add_point(owner, base + ".bottom_right", x0 + c.w0, y0, true);
    GeoId tr = add_point(owner, base + ".top_right", x0 + c.w0, y0 + c.h0, true);
    GeoId tl = add_point(owner, base + ".top_left", x0, y0 + c.h0, true);
    GeoId bottom = add_line(owner, base + ".bottom", bl, br, true);
    GeoId right = add_line(owner, base + ".right", br, tr, true);
    GeoId top = add_line(owner, base + ".top", tr, tl, true);
    GeoId left = add_line(owner, base + ".left", tl, bl, true);
    auto& cc = std::get<CompoundGeo>(geos_[compound_id].shape);  // vector may have moved
    cc.members.push_back(member_geo("bottom_left", bl));
    cc.members.push_back(member_geo("bottom_right", br));
    cc.members.push_back(member_geo("top_right", tr));
    cc.members.push_back(member_geo("top_left", tl));
    cc.members.push_back(member_geo("bottom", bottom));
    cc.members.push_back(member_geo("right", right));
    cc.members.push_back(member_geo("top", top));
    cc.members.push_back(member_geo("left", left));
    cc.members.push_back(member_derived("width", line_length(bottom)));
    cc.members.push_back(member_derived("height", line_length(left)));
    cc.flattened = true;
  } else {
    GeoId pts[3];
    if (c.anchored_by_ref) {
      for (int i = 0; i < 3; ++i) pts[i] = c.anchor_points[i];
    } else {
      static const char* names[3] = {".pt_a", ".pt_b", ".pt_c"};
      for (int i = 0; i < 3; ++i)
        pts[i] = add_point(owner, base + names[i], c.anchor_coords[i].first,
                           c.anchor_coords[i].second, true);
    }
    GeoId ab = add_line(owner, base + ".edge_ab", pts[0], pts[1], true);
    GeoId bc = add_line(owner, base + ".edge_bc", pts[1], pts[2], true);
    GeoId ca = add_line(owner, base + ".edge_ca", pts[2], pts[0], true);
    auto& cc = std::get<CompoundGeo>(geos_[compound_id].shape);
    cc.members.push_back(member_geo("pt_a", pts[0]));
    cc.members.push_back(member_geo("pt_b", pts[1]));
    cc.members.push_back(member_geo("pt_c", pts[2]));
    cc.members.push_back(member_geo("edge_ab", ab));
    cc.members.push_back(member_geo("edge_bc", bc));
    cc.members.push_back(member_geo("edge_ca", ca));
    cc.flattened = true;
  }
}

void Model::flatten_compounds(StructureId structure) {
  // Geometry list grows while flattening; take a stable copy first.
  std::vector<GeoId> present = structs_[structure].geometry;
  for (GeoId id : present)
    if (geos_[id].is_compound()) flatten_one(id);
  for (StructureId c : structs_[structure].children) flatten_compounds(c);
}

// --- queries ---------------------------------------------------------------

std::string Model::path_of(StructureId id) const {
  if (id == kNoId) return "";
  std::vector<const std::string*> parts;
  for (StructureId cur = id; cur != kNoId; cur = structs_[cur].parent)
    parts.push_back(&structs_[cur].name);
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out += '.';
    out += **it;
  }
  return out;
}

std::string Model::param_path(ParamId id) const {
  const ParamMeta& m = meta_[id];
  if (m.owner == kNoId) return m.name;
  return path_of(m.owner) + "." + m.name;
}

bool Model::in_subtree(StructureId node, StructureId root) const {
  for (StructureId cur = node; cur != kNoId; cur = structs_[cur].parent)
    if (cur == root) return true;
  return false;
}

int Model::subtree_depth(StructureId id) const {
  int depth = 0;
  for (StructureId c : structs_[id].children)
    depth = std::max(depth, 1 + subtree_depth(c));
  return depth;
}

std::vector<StructureId> Model::descendants_at_depth(StructureId root, int depth) const {
  std::vector<StructureId> out;
  if (depth == 0) {
    out.push_back(root);
    return out;
  }
  for (StructureId c : structs_[root].children) {
    auto sub = descendants_at_depth(c, depth - 1);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::optional<Resolved> Model::find_member(StructureId scope, const std::string& name) const {
  for (const auto& [n, r] : names_[scope])
    if (n == name) return r;
  return std::nullopt;
}

Resolved Model::resolve_path(StructureId scope, std::span<const std::string> segments) {
  if (segments.empty())
    throw ModelError{ModelError::Kind::BadArgument, "empty reference path"};
  Resolved cur;
  std::size_t i = 0;
  if (segments[0] == structs_[scope].name) {
    cur.kind = Resolved::Kind::Structure;
    cur.structure = scope;
    i = 1;
  } else if (auto m = find_member(scope, segments[0])) {
    cur = *m;
    i = 1;
  } else {
    throw ModelError{ModelError::Kind::BadArgument,
                     "unknown name '" + segments[0] + "' in structure '" + path_of(scope) + "'"};
  }
  for (; i < segments.size(); ++i) {
    const std::string& seg = segments[i];
    switch (cur.kind) {
      case Resolved::Kind::Structure: {
        StructureId s = cur.structure;
        if (seg == "bb") {
          if (i + 1 >= segments.size())
            throw ModelError{ModelError::Kind::BadArgument,
                             "bounding box reference needs a side, e.g. '.bb.top'"};
          const std::string& sd = segments[i + 1];
          Resolved r;
          r.kind = Resolved::Kind::BBoxSide;
          r.structure = s;
          if (sd == "left") r.side = BBoxSideKind::Left;
          else if (sd == "right") r.side = BBoxSideKind::Right;
          else if (sd == "top") r.side = BBoxSideKind::Top;
          else if (sd == "bottom") r.side = BBoxSideKind::Bottom;
          else if (sd == "width") r.side = BBoxSideKind::Width;
          else if (sd == "height") r.side = BBoxSideKind::Height;
          else
            throw ModelError{ModelError::Kind::BadArgument,
                             "unknown bounding box side '" + sd + "'"};
          if (i + 2 != segments.size())
            throw ModelError{ModelError::Kind::BadArgument,
                             "no members beyond a bounding box side"};
          return r;
        }
        if (auto m = find_member(s, seg)) {
          cur = *m;
        } else {
          throw ModelError{ModelError::Kind::BadArgument,
                           "unknown name '" + seg + "' in structure '" + path_of(s) + "'"};
        }
        break;
      }
      case Resolved::Kind::Geometry: {
        const Geometry& g = geos_[cur.geo];
        Resolved r;
        if (g.is_point()) {
          const auto& p = std::get<PointGeo>(g.shape);
          if (seg == "x") { r.kind = Resolved::Kind::Param; r.param = p.x; }
          else if (seg == "y") { r.kind = Resolved::Kind::Param; r.param = p.y; }
          else
            throw ModelError{ModelError::Kind::BadArgument,
                             "point '" + g.name + "' has no member '" + seg + "'"};
        } else if (g.is_line()) {
          const auto& l = std::get<LineGeo>(g.shape);
          if (seg == "start") { r.kind = Resolved::Kind::Geometry; r.geo = l.start; }
          else if (seg == "end") { r.kind = Resolved::Kind::Geometry; r.geo = l.end; }
          else if (seg == "length") { r.kind = Resolved::Kind::Derived; r.derived = line_length(cur.geo); }
          else
            throw ModelError{ModelError::Kind::BadArgument,
                             "line '" + g.name + "' has no member '" + seg + "'"};
        } else if (g.is_arc()) {
          const auto& a = std::get<ArcGeo>(g.shape);
          if (seg == "center") { r.kind = Resolved::Kind::Geometry; r.geo = a.center; }
          else if (seg == "start") { r.kind = Resolved::Kind::Geometry; r.geo = a.start; }
          else if (seg == "end") { r.kind = Resolved::Kind::Geometry; r.geo = a.end; }
          else if (seg == "radius") { r.kind = Resolved::Kind::Derived; r.derived = circle_radius_expr(cur.geo); }
          else if (seg == "diameter") { r.kind = Resolved::Kind::Derived; r.derived = circle_diameter(cur.geo); }
          else
            throw ModelError{ModelError::Kind::BadArgument,
                             "arc '" + g.name + "' has no member '" + seg + "'"};
        } else if (g.is_circle()) {
          const auto& ci = std::get<CircleGeo>(g.shape);
          if (seg == "center") { r.kind = Resolved::Kind::Geometry; r.geo = ci.center; }
          else if (seg == "radius") { r.kind = Resolved::Kind::Param; r.param = ci.radius; }
          else if (seg == "diameter") { r.kind = Resolved::Kind::Derived; r.derived = circle_diameter(cur.geo); }
          else
            throw ModelError{ModelError::Kind::BadArgument,
                             "circle '" + g.name + "' has no member '" + seg + "'"};
        } else {
          const auto& c = std::get<CompoundGeo>(g.shape);
          bool found = false;
          for (const auto& m : c.members) {
            if (m.name != seg) continue;
            found = true;
            switch (m.kind) {
              case CompoundMember::Kind::Geo: r.kind = Resolved::Kind::Geometry; r.geo = m.geo; break;
              case CompoundMember::Kind::Param: r.kind = Resolved::Kind::Param; r.param = m.param; break;
              case CompoundMember::Kind::Derived: r.kind = Resolved::Kind::Derived; r.derived = m.derived; break;
            }
            break;
          }
          if (!found)
            throw ModelError{ModelError::Kind::BadArgument,
                             "'" + g.name + "' has no member '" + seg + "'"};
        }
        cur = r;
        break;
      }
      case Resolved::Kind::Param:
        throw ModelError{ModelError::Kind::BadArgument,
                         "parameter reference has no member '" + seg + "'"};
      case Resolved::Kind::Derived:
      case Resolved::Kind::BBoxSide:
        throw ModelError{ModelError::Kind::BadArgument,
                         "value reference has no member '" + seg + "'"};
    }
  }
  return cur;
}

ExprId Model::point_x(GeoId point) { return pool_.param(std::get<PointGeo>(geos_[point].shape).x); }
ExprId Model::point_y(GeoId point) { return pool_.param(std::get<PointGeo>(geos_[point].shape).y); }

ExprId Model::line_length(GeoId line) {
  const auto& l = std::get<LineGeo>(geos_[line].shape);
  ExprId dx = pool_.sub(point_x(l.end), point_x(l.start));
  ExprId dy = pool_.sub(point_y(l.end), point_y(l.start));
  return pool_.unary(UnaryOp::Sqrt, pool_.add(pool_.square(dx), pool_.square(dy)));
}

ExprId Model::circle_radius_expr(GeoId id) {
  const Geometry& g = geos_[id];
  if (g.is_circle()) return pool_.param(std::get<CircleGeo>(g.shape).radius);
  const auto& a = std::get<ArcGeo>(g.shape);
  ExprId dx = pool_.sub(point_x(a.start), point_x(a.center));
  ExprId dy = pool_.sub(point_y(a.start), point_y(a.center));
  return pool_.unary(UnaryOp::Sqrt, pool_.add(pool_.square(dx), pool_.square(dy)));
}

ExprId Model::circle_diameter(GeoId id) {
  return pool_.mul(pool_.constant(2.0), circle_radius_expr(id));
}

std::pair<ExprId, ExprId> Model::offset_to_ancestor(StructureId from, StructureId ancestor) {
  ExprId ox = kNoId, oy = kNoId;
  for (StructureId cur = from; cur != ancestor; cur = structs_[cur].parent) {
    if (cur == kNoId)
      throw ModelError{ModelError::Kind::BadArgument, "offset target is not an ancestor"};
    const Frame& f = structs_[cur].frame;
    if (f.tx == kNoId) continue;  // root has no translation
    ExprId tx = pool_.param(f.tx);
    ExprId ty = pool_.param(f.ty);
    ox = ox == kNoId ? tx : pool_.add(ox, tx);
    oy = oy == kNoId ? ty : pool_.add(oy, ty);
  }
  if (ox == kNoId) {
    ox = pool_.constant(0.0);
    oy = pool_.constant(0.0);
  }
  return {ox, oy};
}

std::pair<ExprId, ExprId> Model::point_in_frame(GeoId point, StructureId ancestor) {
  const Geometry& g = geos_[point];
  ExprId x = point_x(point);
  ExprId y = point_y(point);
  if (g.owner == ancestor) return {x, y};
  auto [ox, oy] = offset_to_ancestor(g.owner, ancestor);
  return {pool_.add(x, ox), pool_.add(y, oy)};
}

// --- bounding boxes ----------------------------------------------------------

void Model::collect_bbox_points(StructureId node, StructureId top,
                                const std::vector<StructureId>& exclusion,
                                std::vector<GeoId>& points) {
  if (node != top &&
      std::binary_search(exclusion.begin(), exclusion.end(), node))
    return;
  for (GeoId g : structs_[node].geometry)
    if (geos_[g].is_point()) points.push_back(g);
  for (StructureId c : structs_[node].children)
    collect_bbox_points(c, top, exclusion, points);
}

const BBoxInstance& Model::bounding_box(StructureId structure,
                                        std::vector<StructureId> exclusion) {
  // normalize: sorted unique proper descendants
  std::sort(exclusion.begin(), exclusion.end());
  exclusion.erase(std::unique(exclusion.begin(), exclusion.end()), exclusion.end());
  std::erase_if(exclusion, [&](StructureId e) {
    return e == structure || !in_subtree(e, structure);
  });
  for (const auto& inst : bbox_instances_)
    if (inst.structure == structure && inst.exclusion == exclusion) return inst;

  BBoxInstance box;
  box.structure = structure;
  box.exclusion = exclusion;

  std::vector<GeoId> pts;
  collect_bbox_points(structure, structure, exclusion, pts);

  const Frame& f = structs_[structure].frame;
  if (pts.empty()) {
    box.is_virtual = true;
    std::string base = "__bb" + std::to_string(bbox_virtual_counter_++);
    ParamId l = add_parameter(structure, base + ".left", 0, true, ParamRole::BBoxVirtual);
    ParamId r = add_parameter(structure, base + ".right", 0, true, ParamRole::BBoxVirtual);
    ParamId t = add_parameter(structure, base + ".top", 0, true, ParamRole::BBoxVirtual);
    ParamId b = add_parameter(structure, base + ".bottom", 0, true, ParamRole::BBoxVirtual);
    box.virtual_params = {l, r, t, b};
    ExprId le = pool_.param(l), re = pool_.param(r), te = pool_.param(t), be = pool_.param(b);
    box.width = pool_.sub(re, le);
    box.height = pool_.sub(te, be);
    if (f.tx != kNoId) {
      ExprId tx = pool_.param(f.tx), ty = pool_.param(f.ty);
      box.left = pool_.add(le, tx);
      box.right = pool_.add(re, tx);
      box.top = pool_.add(te, ty);
      box.bottom = pool_.add(be, ty);
    } else {
      box.left = le; box.right = re; box.top = te; box.bottom = be;
    }
  } else {
    ExprId lmin = kNoId, rmax = kNoId, tmax = kNoId, bmin = kNoId;
    for (GeoId p : pts) {
      StructureId owner = geos_[p].owner;
      ExprId x = point_x(p), y = point_y(p);
      if (owner != structure) {
        auto [ox, oy] = offset_to_ancestor(owner, structure);
        x = pool_.add(x, ox);
        y = pool_.add(y, oy);
      }
      lmin = lmin == kNoId ? x : pool_.binary(BinaryOp::Min, lmin, x);
      rmax = rmax == kNoId ? x : pool_.binary(BinaryOp::Max, rmax, x);
      bmin = bmin == kNoId ? y : pool_.binary(BinaryOp::Min, bmin, y);
      tmax = tmax == kNoId ? y : pool_.binary(BinaryOp::Max, tmax, y);
    }
    box.width = pool_.sub(rmax, lmin);
    box.height = pool_.sub(tmax, bmin);
    if (f.tx != kNoId) {
      ExprId tx = pool_.param(f.tx), ty = pool_.param(f.ty);
      box.left = pool_.add(lmin, tx);
      box.right = pool_.add(rmax, tx);
      box.top = pool_.add(tmax, ty);
      box.bottom = pool_.add(bmin, ty);
    } else {
      box.left = lmin; box.right = rmax; box.top = tmax; box.bottom = bmin;
    }
  }
  bbox_instances_.push_back(std::move(box));
  return bbox_instances_.back();
}

ExprId Model::bbox_side_in_frame(const BBoxInstance& box, BBoxSideKind side,
                                 StructureId frame) {
  switch (side) {
    case BBoxSideKind::Width: return box.width;
    case BBoxSideKind::Height: return box.height;
    default: break;
  }
  ExprId e = kNoId;
  bool horizontal = side == BBoxSideKind::Left || side == BBoxSideKind::Right;
  switch (side) {
    case BBoxSideKind::Left: e = box.left; break;
    case BBoxSideKind::Right: e = box.right; break;
    case BBoxSideKind::Top: e = box.top; break;
    case BBoxSideKind::Bottom: e = box.bottom; break;
    default: break;
  }
  StructureId parent = structs_[box.structure].parent;
  if (parent == kNoId || parent == frame) return e;
  auto [ox, oy] = offset_to_ancestor(parent, frame);
  return pool_.add(e, horizontal ? ox : oy);
}

std::vector<ParamId> Model::collect_params(ExprId e) const {
  std::vector<ParamId> out;
  std::vector<char> visited(pool_.size(), 0);
  std::vector<ExprId> work{e};
  while (!work.empty()) {
    ExprId id = work.back();
    work.pop_back();
    if (visited[id]) continue;
    visited[id] = 1;
    const ExprNode& n = pool_.node(id);
    switch (n.kind) {
      case ExprKind::Const: break;
      case ExprKind::Param: out.push_back(n.param); break;
      case ExprKind::Unary: work.push_back(n.a); break;
      case ExprKind::Binary: work.push_back(n.a); work.push_back(n.b); break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// --- validation --------------------------------------------------------------

namespace {

struct Validator {
  const Model& model;
  std::vector<Diagnostic>& out;

  void emit(const std::string& code, StructureId at, const std::string& msg) {
    Diagnostic d;
    d.code = code;
    d.severity = Severity::Error;
    d.message = msg;
    d.path = model.path_of(at);
    out.push_back(std::move(d));
  }

  void check_geometry(StructureId sid) {
    const Structure& s = model.structure(sid);
    for (GeoId gid : s.geometry) {
      const Geometry& g = model.geo(gid);
      auto check_pt = [&](GeoId p, const char* what) {
        if (p >= model.geo_count()) {
          emit("E0009", sid, std::string(what) + " of '" + g.name + "' is dangling");
          return;
        }
        const Geometry& t = model.geo(p);
        if (!t.is_point())
          emit("E0006", sid, std::string(what) + " of '" + g.name + "' is not a Point");
        else if (t.owner != g.owner)
          emit("E0007", sid,
               "'" + g.name + "' references '" + t.name + "' from another structure");
      };
      if (g.is_line()) {
        const auto& l = std::get<LineGeo>(g.shape);
        check_pt(l.start, "start");
        check_pt(l.end, "end");
      } else if (g.is_arc()) {
        const auto& a = std::get<ArcGeo>(g.shape);
        check_pt(a.center, "center");
        check_pt(a.start, "start");
        check_pt(a.end, "end");
      } else if (g.is_circle()) {
        const auto& c = std::get<CircleGeo>(g.shape);
        check_pt(c.center, "center");
        if (c.radius >= model.param_count())
          emit("E0009", sid, "radius of '" + g.name + "' is dangling");
        else if (model.param_meta(c.radius).owner != g.owner)
          emit("E0007", sid, "radius of '" + g.name + "' belongs to another structure");
      }
    }
  }

  bool entity_in_subtree(StructureId owner_of_entity, StructureId constraint_owner) {
    return model.in_subtree(owner_of_entity, constraint_owner);
  }

  void check_scalar(const SurfExprPtr& e, StructureId sid, const ConstraintSpec& c) {
    if (!e) return;
    switch (e->kind) {
      case SurfExpr::Kind::Const:
        break;
      case SurfExpr::Kind::Expr:
        for (ParamId p : model.collect_params(e->expr))
          if (!entity_in_subtree(model.param_meta(p).owner, sid))
            emit("E0004", sid,
                 "constraint '" + display(c) + "' references parameter '" +
                     model.param_path(p) + "' outside its subtree");
        break;
      case SurfExpr::Kind::BBoxSide:
        if (e->bb_struct >= model.structure_count()) {
          emit("E0009", sid, "constraint '" + display(c) + "' has a dangling structure reference");
        } else if (e->bb_struct == sid) {
          emit("E0008", sid,
               "constraint '" + display(c) + "' references the bounding box of its own structure");
        } else if (!entity_in_subtree(e->bb_struct, sid)) {
          emit("E0004", sid,
               "constraint '" + display(c) + "' references structure '" +
                   model.path_of(e->bb_struct) + "' outside its subtree");
        }
        break;
      case SurfExpr::Kind::Unary:
        check_scalar(e->a, sid, c);
        break;
      case SurfExpr::Kind::Binary:
      case SurfExpr::Kind::Cmp:
      case SurfExpr::Kind::And:
        check_scalar(e->a, sid, c);
        check_scalar(e->b, sid, c);
        break;
    }
  }

  static std::string display(const ConstraintSpec& c) {
    if (!c.surface.empty()) return c.surface;
    if (!c.canonical.empty()) return c.canonical;
    return "equation";
  }

  void check_constraints(StructureId sid) {
    const Structure& s = model.structure(sid);
    for (const ConstraintSpec& c : s.constraints) {
      if (c.canonical.empty()) {
        if (!c.equation || (c.equation->kind != SurfExpr::Kind::Cmp &&
                            c.equation->kind != SurfExpr::Kind::And))
          emit("E0006", sid, "equation constraint must compare two expressions");
        check_scalar(c.equation, sid, c);
        continue;
      }
      // dangling references first; later checks assume live targets
      bool dangling = false;
      for (const ConstraintArg& a : c.args) {
        if ((a.kind == ConstraintArg::Kind::Geometry && a.geo >= model.geo_count()) ||
            (a.kind == ConstraintArg::Kind::Structure &&
             a.structure >= model.structure_count()) ||
            (a.kind == ConstraintArg::Kind::Param && a.param >= model.param_count())) {
          emit("E0009", sid, "constraint '" + display(c) + "' has a dangling reference");
          dangling = true;
          break;
        }
      }
      if (dangling) continue;
      if (!Registry::instance().find(c.canonical)) {
        emit("E0005", sid, "unknown constraint '" + c.canonical + "'");
        continue;
      }
      if (std::string err = check_signature(model, c); !err.empty()) {
        emit("E0006", sid, err);
        continue;
      }
      for (const ConstraintArg& a : c.args) {
        switch (a.kind) {
          case ConstraintArg::Kind::Geometry:
            if (!entity_in_subtree(model.geo(a.geo).owner, sid))
              emit("E0004", sid,
                   "constraint '" + display(c) + "' references geometry '" +
                       model.geo(a.geo).name + "' outside its subtree");
            break;
          case ConstraintArg::Kind::Structure:
            if (a.structure == sid)
              emit("E0008", sid,
                   "constraint '" + display(c) + "' references its own structure");
            else if (!entity_in_subtree(a.structure, sid))
              emit("E0004", sid,
                   "constraint '" + display(c) + "' references structure '" +
                       model.path_of(a.structure) + "' outside its subtree");
            break;
          case ConstraintArg::Kind::Param:
            if (!entity_in_subtree(model.param_meta(a.param).owner, sid))
              emit("E0004", sid,
                   "constraint '" + display(c) + "' references parameter '" +
                       model.param_path(a.param) + "' outside its subtree");
            break;
          case ConstraintArg::Kind::Scalar:
            check_scalar(a.scalar, sid, c);
            break;
        }
      }
    }
  }

  void run(StructureId sid) {
    check_geometry(sid);
    check_constraints(sid);
    for (StructureId c : model.structure(sid).children) run(c);
  }
};

}  // namespace

std::vector<Diagnostic> Model::validate() const {
  std::vector<Diagnostic> out;
  if (root_ == kNoId) return out;
  Validator v{*this, out};
  v.run(root_);
  return out;
}

}  // namespace aidl
