#include "constraints.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <json.hpp>

namespace aidl {

namespace detail {
extern const char* kRegistryJson;  // generated from data/constraint_registry.json
}

Registry::Registry() {
  auto j = nlohmann::json::parse(detail::kRegistryJson);
  for (const auto& c : j.at("constraints")) {
    ConstraintDef def;
    def.canonical = c.at("canonical").get<std::string>();
    for (const auto& s : c.at("synonyms")) def.synonyms.push_back(s.get<std::string>());
    def.structural = c.value("structural", false);
    for (const auto& sig : c.at("signatures")) {
      std::vector<std::string> atoms;
      for (const auto& a : sig) atoms.push_back(a.get<std::string>());
      def.signatures.push_back(std::move(atoms));
    }
    defs_.push_back(std::move(def));
  }
  if (j.contains("suggestion_hints"))
    for (const auto& [k, v] : j.at("suggestion_hints").items())
      hints_.push_back({k, v.get<std::string>()});
}

const Registry& Registry::instance() {
  static Registry r;
  return r;
}

const ConstraintDef* Registry::find(const std::string& canonical) const {
  for (const auto& d : defs_)
    if (d.canonical == canonical) return &d;
  return nullptr;
}

std::optional<std::string> Registry::resolve(const std::string& surface) const {
  for (const auto& d : defs_) {
    if (d.canonical == surface) return d.canonical;
    for (const auto& s : d.synonyms)
      if (s == surface) return d.canonical;
  }
  return std::nullopt;
}

int edit_distance(const std::string& a, const std::string& b) {
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int subst = prev[j - 1] + (lower(a[i - 1]) == lower(b[j - 1]) ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string Registry::suggest(const std::string& surface) const {
  for (const auto& [from, to] : hints_) {
    if (from.size() != surface.size()) continue;
    bool eq = true;
    for (std::size_t i = 0; i < from.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(from[i])) !=
          std::tolower(static_cast<unsigned char>(surface[i]))) {
        eq = false;
        break;
      }
    if (eq) return to;
  }
  std::string best;
  int best_d = 1 << 30;
  auto consider = [&](const std::string& name) {
    int d = edit_distance(surface, name);
    if (d < best_d || (d == best_d && name < best)) {
      best_d = d;
      best = name;
    }
  };
  for (const auto& d : defs_) {
    consider(d.canonical);
    for (const auto& s : d.synonyms) consider(s);
  }
  return best;
}

SynonymResolution resolve_synonym(const std::string& surface) {
  const Registry& reg = Registry::instance();
  if (auto c = reg.resolve(surface)) return {true, *c, ""};
  return {false, "", reg.suggest(surface)};
}

// --- signature checking ------------------------------------------------------

namespace {

std::string arg_kind_name(const Model& m, const ConstraintArg& a) {
  switch (a.kind) {
    case ConstraintArg::Kind::Geometry: {
      if (a.geo >= m.geo_count()) return "dangling";
      const Geometry& g = m.geo(a.geo);
      if (g.is_point()) return "point";
      if (g.is_line()) return "line";
      if (g.is_arc()) return "arc";
      if (g.is_circle()) return "circle";
      return "compound";
    }
    case ConstraintArg::Kind::Structure: return "structure";
    case ConstraintArg::Kind::Param: return "scalar";
    case ConstraintArg::Kind::Scalar: return "scalar";
  }
  return "?";
}

bool atom_matches(const Model& m, const std::string& atom, const ConstraintArg& a) {
  auto geo_is = [&](auto pred) {
    return a.kind == ConstraintArg::Kind::Geometry && a.geo < m.geo_count() && pred(m.geo(a.geo));
  };
  if (atom == "point") return geo_is([](const Geometry& g) { return g.is_point(); });
  if (atom == "line") return geo_is([](const Geometry& g) { return g.is_line(); });
  if (atom == "arc") return geo_is([](const Geometry& g) { return g.is_arc(); });
  if (atom == "circle") return geo_is([](const Geometry& g) { return g.is_circle(); });
  if (atom == "curve")
    return geo_is([](const Geometry& g) { return g.is_line() || g.is_arc() || g.is_circle(); });
  if (atom == "circlelike")
    return geo_is([](const Geometry& g) { return g.is_arc() || g.is_circle(); });
  if (atom == "structure") return a.kind == ConstraintArg::Kind::Structure;
  if (atom == "param") return a.kind == ConstraintArg::Kind::Param;
  if (atom == "scalar")
    return a.kind == ConstraintArg::Kind::Param || a.kind == ConstraintArg::Kind::Scalar;
  if (atom == "measure")
    return a.kind == ConstraintArg::Kind::Param || a.kind == ConstraintArg::Kind::Scalar ||
           geo_is([](const Geometry& g) { return g.is_line() || g.is_arc() || g.is_circle(); });
  if (atom == "entity")
    return a.kind == ConstraintArg::Kind::Param ||
           geo_is([](const Geometry& g) { return !g.is_compound(); });
  return false;
}

std::string sig_to_string(const std::vector<std::string>& sig) {
  std::string out = "(";
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ", ";
    out += sig[i];
  }
  out += ")";
  return out;
}

}  // namespace

std::string check_signature(const Model& model, const ConstraintSpec& spec) {
  const ConstraintDef* def = Registry::instance().find(spec.canonical);
  if (!def) return "unknown constraint '" + spec.canonical + "'";
  for (const auto& sig : def->signatures) {
    if (sig.size() != spec.args.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < sig.size() && ok; ++i)
      ok = atom_matches(model, sig[i], spec.args[i]);
    if (ok) return "";
  }
  std::string got = "(";
  for (std::size_t i = 0; i < spec.args.size(); ++i) {
    if (i) got += ", ";
    got += arg_kind_name(model, spec.args[i]);
  }
  got += ")";
  std::string expect;
  for (std::size_t i = 0; i < def->signatures.size(); ++i) {
    if (i) expect += " or ";
    expect += sig_to_string(def->signatures[i]);
  }
  return spec.canonical + " expects " + expect + "; got " + got;
}

// --- lowering ----------------------------------------------------------------

namespace {

struct LowerCtx {
  Model& m;
  StructureId owner;
  std::vector<StructureId> mentions;  // structures co-occurring in this constraint
  LoweredConstraint out;

  ExprPool& pool() { return m.pool(); }

  void residual(ExprId e) { out.residuals.push_back(e); }

  // lhs <= rhs
  void inequality(ExprId lhs, ExprId rhs) {
    LoweredConstraint lc = rewrite_inequality(m, owner, lhs, rhs);
    for (ExprId e : lc.residuals) out.residuals.push_back(e);
    for (ParamId s : lc.slacks) out.slacks.push_back(s);
  }
  // e >= 0
  void geq0(ExprId e) { inequality(pool().constant(0.0), e); }

  ExprId bbox_side(StructureId s, BBoxSideKind side) {
    std::vector<StructureId> excl;
    for (StructureId other : mentions)
      if (other != s && m.in_subtree(other, s)) excl.push_back(other);
    const BBoxInstance& box = m.bounding_box(s, std::move(excl));
    return m.bbox_side_in_frame(box, side, owner);
  }

  ExprId surf_to_expr(const SurfExprPtr& e) {
    switch (e->kind) {
      case SurfExpr::Kind::Const: return pool().constant(e->value);
      case SurfExpr::Kind::Expr: return e->expr;
      case SurfExpr::Kind::BBoxSide: return bbox_side(e->bb_struct, e->side);
      case SurfExpr::Kind::Unary: return pool().unary(e->uop, surf_to_expr(e->a));
      case SurfExpr::Kind::Binary:
        return pool().binary(e->bop, surf_to_expr(e->a), surf_to_expr(e->b));
      default:
        throw ModelError{ModelError::Kind::BadArgument,
                         "comparison used where a scalar expression is expected"};
    }
  }

  // scalar magnitude of a measure argument
  ExprId scalarize(const ConstraintArg& a) {
    switch (a.kind) {
      case ConstraintArg::Kind::Param: return pool().param(a.param);
      case ConstraintArg::Kind::Scalar: return surf_to_expr(a.scalar);
      case ConstraintArg::Kind::Geometry: {
        const Geometry& g = m.geo(a.geo);
        if (g.is_line()) return m.line_length(a.geo);
        if (g.is_circle() || g.is_arc()) return m.circle_radius_expr(a.geo);
        throw ModelError{ModelError::Kind::BadArgument, "no scalar measure for this geometry"};
      }
      default:
        throw ModelError{ModelError::Kind::BadArgument, "structure used as a scalar"};
    }
  }

  std::pair<ExprId, ExprId> pt(GeoId p) { return m.point_in_frame(p, owner); }

  // line direction, translation-invariant
  std::pair<ExprId, ExprId> line_dir(GeoId line) {
    const auto& l = std::get<LineGeo>(m.geo(line).shape);
    return {pool().sub(m.point_x(l.end), m.point_x(l.start)),
            pool().sub(m.point_y(l.end), m.point_y(l.start))};
  }

  ExprId dist2(GeoId a, GeoId b) {
    auto [ax, ay] = pt(a);
    auto [bx, by] = pt(b);
    return pool().add(pool().square(pool().sub(ax, bx)), pool().square(pool().sub(ay, by)));
  }

  GeoId center_of(GeoId circlelike) {
    const Geometry& g = m.geo(circlelike);
    if (g.is_circle()) return std::get<CircleGeo>(g.shape).center;
    return std::get<ArcGeo>(g.shape).center;
  }

  double eval_now(ExprId e) { return eval(pool(), e, m.values()); }
};

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

void lower_coincident(LowerCtx& c, const ConstraintSpec& spec) {
  const ConstraintArg& a = spec.args[0];
  const ConstraintArg& b = spec.args[1];
  const Geometry& ga = c.m.geo(a.geo);
  const Geometry& gb = c.m.geo(b.geo);
  if (ga.is_point() && gb.is_point()) {
    auto [ax, ay] = c.pt(a.geo);
    auto [bx, by] = c.pt(b.geo);
    c.residual(c.pool().sub(ax, bx));
    c.residual(c.pool().sub(ay, by));
    return;
  }
  GeoId point = ga.is_point() ? a.geo : b.geo;
  GeoId curve = ga.is_point() ? b.geo : a.geo;
  const Geometry& gc = c.m.geo(curve);
  auto [px, py] = c.pt(point);
  if (gc.is_line()) {
    const auto& l = std::get<LineGeo>(gc.shape);
    auto [dx, dy] = c.line_dir(curve);
    auto [ax, ay] = c.pt(l.start);
    // cross(d, p - a) = 0: point on the infinite carrier line
    c.residual(c.pool().sub(c.pool().mul(dx, c.pool().sub(py, ay)),
                            c.pool().mul(dy, c.pool().sub(px, ax))));
  } else {
    GeoId ctr = c.center_of(curve);
    auto [cx, cy] = c.pt(ctr);
    ExprId d2 = c.pool().add(c.pool().square(c.pool().sub(px, cx)),
                             c.pool().square(c.pool().sub(py, cy)));
    ExprId r = c.m.circle_radius_expr(curve);
    c.residual(c.pool().sub(d2, c.pool().square(r)));
  }
}

void lower_horizontal(LowerCtx& c, const ConstraintSpec& spec) {
  const auto& l = std::get<LineGeo>(c.m.geo(spec.args[0].geo).shape);
  c.residual(c.pool().sub(c.m.point_y(l.end), c.m.point_y(l.start)));
}

void lower_vertical(LowerCtx& c, const ConstraintSpec& spec) {
  const auto& l = std::get<LineGeo>(c.m.geo(spec.args[0].geo).shape);
  c.residual(c.pool().sub(c.m.point_x(l.end), c.m.point_x(l.start)));
}

void lower_equal(LowerCtx& c, const ConstraintSpec& spec) {
  c.residual(c.pool().sub(c.scalarize(spec.args[0]), c.scalarize(spec.args[1])));
}

void lower_tangent(LowerCtx& c, const ConstraintSpec& spec) {
  const Geometry& ga = c.m.geo(spec.args[0].geo);
  const Geometry& gb = c.m.geo(spec.args[1].geo);
  bool a_line = ga.is_line();
  bool b_line = gb.is_line();
  if (!a_line && !b_line) {
    GeoId ca = c.center_of(spec.args[0].geo);
    GeoId cb = c.center_of(spec.args[1].geo);
    ExprId d2 = c.dist2(ca, cb);
    ExprId ra = c.m.circle_radius_expr(spec.args[0].geo);
    ExprId rb = c.m.circle_radius_expr(spec.args[1].geo);
    ExprId ext = c.pool().sub(d2, c.pool().square(c.pool().add(ra, rb)));
    ExprId inn = c.pool().sub(d2, c.pool().square(c.pool().sub(ra, rb)));
    // Deferred sign branch: external vs internal tangency, whichever the
    // initialization is nearer to satisfying.
    double rext = std::fabs(c.eval_now(ext));
    double rinn = std::fabs(c.eval_now(inn));
    c.residual(rinn < rext ? inn : ext);
    return;
  }
  GeoId line = a_line ? spec.args[0].geo : spec.args[1].geo;
  GeoId circ = a_line ? spec.args[1].geo : spec.args[0].geo;
  const auto& l = std::get<LineGeo>(c.m.geo(line).shape);
  auto [dx, dy] = c.line_dir(line);
  auto [ax, ay] = c.pt(l.start);
  GeoId ctr = c.center_of(circ);
  auto [cx, cy] = c.pt(ctr);
  ExprId cross = c.pool().sub(c.pool().mul(dx, c.pool().sub(cy, ay)),
                              c.pool().mul(dy, c.pool().sub(cx, ax)));
  ExprId norm2 = c.pool().add(c.pool().square(dx), c.pool().square(dy));
  ExprId r = c.m.circle_radius_expr(circ);
  // point-line distance^2 - r^2
  c.residual(c.pool().sub(c.pool().div(c.pool().square(cross), norm2), c.pool().square(r)));
}

void lower_perpendicular(LowerCtx& c, const ConstraintSpec& spec) {
  auto [dx1, dy1] = c.line_dir(spec.args[0].geo);
  auto [dx2, dy2] = c.line_dir(spec.args[1].geo);
  c.residual(c.pool().add(c.pool().mul(dx1, dx2), c.pool().mul(dy1, dy2)));
}

void lower_parallel(LowerCtx& c, const ConstraintSpec& spec) {
  auto [dx1, dy1] = c.line_dir(spec.args[0].geo);
  auto [dx2, dy2] = c.line_dir(spec.args[1].geo);
  c.residual(c.pool().sub(c.pool().mul(dx1, dy2), c.pool().mul(dy1, dx2)));
}

void lower_symmetric(LowerCtx& c, const ConstraintSpec& spec) {
  const Geometry& ga = c.m.geo(spec.args[0].geo);
  GeoId axis = spec.args[2].geo;
  const auto& al = std::get<LineGeo>(c.m.geo(axis).shape);
  auto [q1x, q1y] = c.pt(al.start);
  auto [dx, dy] = c.line_dir(axis);
  ExprId d2 = c.pool().add(c.pool().square(dx), c.pool().square(dy));

  auto reflect_eq = [&](GeoId pa, GeoId pb) {
    auto [px, py] = c.pt(pa);
    auto [bx, by] = c.pt(pb);
    ExprId vx = c.pool().sub(px, q1x);
    ExprId vy = c.pool().sub(py, q1y);
    ExprId t = c.pool().div(c.pool().add(c.pool().mul(vx, dx), c.pool().mul(vy, dy)), d2);
    ExprId projx = c.pool().add(q1x, c.pool().mul(t, dx));
    ExprId projy = c.pool().add(q1y, c.pool().mul(t, dy));
    ExprId rx = c.pool().sub(c.pool().mul(c.pool().constant(2.0), projx), px);
    ExprId ry = c.pool().sub(c.pool().mul(c.pool().constant(2.0), projy), py);
    c.residual(c.pool().sub(rx, bx));
    c.residual(c.pool().sub(ry, by));
  };

  if (ga.is_point()) {
    reflect_eq(spec.args[0].geo, spec.args[1].geo);
  } else if (ga.is_line()) {
    const auto& la = std::get<LineGeo>(ga.shape);
    const auto& lb = std::get<LineGeo>(c.m.geo(spec.args[1].geo).shape);
    reflect_eq(la.start, lb.start);
    reflect_eq(la.end, lb.end);
  } else if (ga.is_arc()) {
    const auto& aa = std::get<ArcGeo>(ga.shape);
    const auto& ab = std::get<ArcGeo>(c.m.geo(spec.args[1].geo).shape);
    reflect_eq(aa.center, ab.center);
    reflect_eq(aa.start, ab.start);
    reflect_eq(aa.end, ab.end);
  } else {
    const auto& ca = std::get<CircleGeo>(ga.shape);
    const auto& cb = std::get<CircleGeo>(c.m.geo(spec.args[1].geo).shape);
    reflect_eq(ca.center, cb.center);
    c.residual(c.pool().sub(c.pool().param(ca.radius), c.pool().param(cb.radius)));
  }
}

void lower_fixed(LowerCtx& c, const ConstraintSpec& spec) {
  const ConstraintArg& a = spec.args[0];
  auto pin = [&](ExprId e) { c.residual(c.pool().sub(e, c.pool().constant(c.eval_now(e)))); };
  if (a.kind == ConstraintArg::Kind::Param) {
    pin(c.pool().param(a.param));
    return;
  }
  const Geometry& g = c.m.geo(a.geo);
  auto pin_point = [&](GeoId p) {
    auto [x, y] = c.pt(p);
    pin(x);
    pin(y);
  };
  if (g.is_point()) {
    pin_point(a.geo);
  } else if (g.is_line()) {
    const auto& l = std::get<LineGeo>(g.shape);
    pin_point(l.start);
    pin_point(l.end);
  } else if (g.is_arc()) {
    const auto& arc = std::get<ArcGeo>(g.shape);
    pin_point(arc.center);
    pin_point(arc.start);
    pin_point(arc.end);
  } else {
    const auto& ci = std::get<CircleGeo>(g.shape);
    pin_point(ci.center);
    pin(c.pool().param(ci.radius));
  }
}

void lower_diameter(LowerCtx& c, const ConstraintSpec& spec) {
  ExprId d = c.m.circle_diameter(spec.args[0].geo);
  c.residual(c.pool().sub(d, c.scalarize(spec.args[1])));
}

void lower_distance(LowerCtx& c, const ConstraintSpec& spec) {
  ExprId d2 = c.dist2(spec.args[0].geo, spec.args[1].geo);
  c.residual(c.pool().sub(d2, c.pool().square(c.scalarize(spec.args[2]))));
}

void lower_angle(LowerCtx& c, const ConstraintSpec& spec) {
  auto [dx1, dy1] = c.line_dir(spec.args[0].geo);
  auto [dx2, dy2] = c.line_dir(spec.args[1].geo);
  ExprId cross = c.pool().sub(c.pool().mul(dx1, dy2), c.pool().mul(dy1, dx2));
  ExprId dot = c.pool().add(c.pool().mul(dx1, dx2), c.pool().mul(dy1, dy2));
  ExprId theta = c.scalarize(spec.args[2]);
  double phi0 = std::atan2(c.eval_now(cross), c.eval_now(dot));
  double th0 = c.eval_now(theta);
  // The convention (counter-clockwise vs clockwise target) is the one nearest
  // to being satisfied by the initialization; ties pick counter-clockwise.
  double d_ccw = std::fabs(wrap_angle(phi0 - th0));
  double d_cw = std::fabs(wrap_angle(phi0 + th0));
  ExprId sin_t = c.pool().unary(UnaryOp::Sin, theta);
  ExprId cos_t = c.pool().unary(UnaryOp::Cos, theta);
  // |d1||d2| sin(phi -+ theta) expressed through cross and dot
  ExprId ccw = c.pool().sub(c.pool().mul(cross, cos_t), c.pool().mul(dot, sin_t));
  ExprId cw = c.pool().add(c.pool().mul(cross, cos_t), c.pool().mul(dot, sin_t));
  c.residual(d_cw < d_ccw ? cw : ccw);
}

void lower_structural(LowerCtx& c, const ConstraintSpec& spec, const std::string& name) {
  StructureId A = spec.args[0].structure;
  StructureId B = spec.args[1].structure;
  auto side = [&](StructureId s, BBoxSideKind k) { return c.bbox_side(s, k); };
  if (name == "above") {
    // A.bottom - B.top >= 0
    c.geq0(c.pool().sub(side(A, BBoxSideKind::Bottom), side(B, BBoxSideKind::Top)));
  } else if (name == "below") {
    c.geq0(c.pool().sub(side(B, BBoxSideKind::Bottom), side(A, BBoxSideKind::Top)));
  } else if (name == "left_of") {
    c.geq0(c.pool().sub(side(B, BBoxSideKind::Left), side(A, BBoxSideKind::Right)));
  } else if (name == "right_of") {
    c.geq0(c.pool().sub(side(A, BBoxSideKind::Left), side(B, BBoxSideKind::Right)));
  } else if (name == "taller") {
    c.geq0(c.pool().sub(side(A, BBoxSideKind::Height), side(B, BBoxSideKind::Height)));
  } else if (name == "wider") {
    c.geq0(c.pool().sub(side(A, BBoxSideKind::Width), side(B, BBoxSideKind::Width)));
  } else if (name == "center_inside") {
    ExprId half = c.pool().constant(0.5);
    auto center_x = [&](StructureId s) {
      return c.pool().mul(half, c.pool().add(side(s, BBoxSideKind::Left),
                                             side(s, BBoxSideKind::Right)));
    };
    auto center_y = [&](StructureId s) {
      return c.pool().mul(half, c.pool().add(side(s, BBoxSideKind::Bottom),
                                             side(s, BBoxSideKind::Top)));
    };
    c.residual(c.pool().sub(center_x(A), center_x(B)));
    c.residual(c.pool().sub(center_y(A), center_y(B)));
    c.geq0(c.pool().sub(side(A, BBoxSideKind::Left), side(B, BBoxSideKind::Left)));
    c.inequality(side(A, BBoxSideKind::Right), side(B, BBoxSideKind::Right));
    c.geq0(c.pool().sub(side(A, BBoxSideKind::Bottom), side(B, BBoxSideKind::Bottom)));
    c.inequality(side(A, BBoxSideKind::Top), side(B, BBoxSideKind::Top));
  } else {
    throw ModelError{ModelError::Kind::BadArgument, "unknown structural lowering '" + name + "'"};
  }
}

void lower_equation(LowerCtx& c, const SurfExprPtr& e) {
  switch (e->kind) {
    case SurfExpr::Kind::And:
      lower_equation(c, e->a);
      lower_equation(c, e->b);
      return;
    case SurfExpr::Kind::Cmp: {
      ExprId lhs = c.surf_to_expr(e->a);
      ExprId rhs = c.surf_to_expr(e->b);
      switch (e->cmp) {
        case CmpOp::Eq: c.residual(c.pool().sub(lhs, rhs)); break;
        case CmpOp::Le: c.inequality(lhs, rhs); break;
        case CmpOp::Ge: c.inequality(rhs, lhs); break;
      }
      return;
    }
    default:
      throw ModelError{ModelError::Kind::BadArgument,
                       "equation constraint must compare two expressions"};
  }
}

void collect_mentions(const SurfExprPtr& e, std::vector<StructureId>& out) {
  if (!e) return;
  if (e->kind == SurfExpr::Kind::BBoxSide) out.push_back(e->bb_struct);
  collect_mentions(e->a, out);
  collect_mentions(e->b, out);
}

}  // namespace

LoweredConstraint rewrite_inequality(Model& m, StructureId owner, ExprId lhs, ExprId rhs) {
  LoweredConstraint lc;
  lc.owner = owner;
  lc.canonical = "inequality";
  double gap = eval(m.pool(), rhs, m.values()) - eval(m.pool(), lhs, m.values());
  double s0 = std::max(0.0, gap);
  ParamId s = m.add_parameter(owner, "__s" + std::to_string(m.param_count()), s0, true,
                              ParamRole::Slack);
  ExprId se = m.pool().param(s);
  lc.slacks.push_back(s);
  lc.residuals.push_back(m.pool().add(m.pool().sub(lhs, rhs), se));
  lc.residuals.push_back(m.pool().sub(se, m.pool().unary(UnaryOp::Abs, se)));
  return lc;
}

std::vector<LoweredConstraint> add_noninversion(Model& m, const BBoxInstance& box) {
  std::vector<LoweredConstraint> out;
  ExprId zero = m.pool().constant(0.0);
  // width >= 0, height >= 0
  LoweredConstraint w = rewrite_inequality(m, box.structure, zero, box.width);
  w.canonical = "noninversion";
  w.kind = LoweredKind::NonInversion;
  LoweredConstraint h = rewrite_inequality(m, box.structure, zero, box.height);
  h.canonical = "noninversion";
  h.kind = LoweredKind::NonInversion;
  out.push_back(std::move(w));
  out.push_back(std::move(h));
  return out;
}

LoweredConstraint lower(Model& m, StructureId owner, std::uint32_t spec_index) {
  const ConstraintSpec& spec = m.structure(owner).constraints[spec_index];
  LowerCtx ctx{m, owner, {}, {}};
  ctx.out.owner = owner;
  ctx.out.spec_index = spec_index;
  ctx.out.kind = LoweredKind::UserConstraint;
  ctx.out.canonical = spec.canonical.empty() ? "equation" : spec.canonical;

  for (const ConstraintArg& a : spec.args) {
    if (a.kind == ConstraintArg::Kind::Structure) ctx.mentions.push_back(a.structure);
    if (a.kind == ConstraintArg::Kind::Scalar) collect_mentions(a.scalar, ctx.mentions);
  }
  collect_mentions(spec.equation, ctx.mentions);
  std::sort(ctx.mentions.begin(), ctx.mentions.end());
  ctx.mentions.erase(std::unique(ctx.mentions.begin(), ctx.mentions.end()),
                     ctx.mentions.end());

  if (spec.canonical.empty()) {
    lower_equation(ctx, spec.equation);
    return std::move(ctx.out);
  }
  const std::string& c = spec.canonical;
  if (c == "Coincident") lower_coincident(ctx, spec);
  else if (c == "Horizontal") lower_horizontal(ctx, spec);
  else if (c == "Vertical") lower_vertical(ctx, spec);
  else if (c == "Equal") lower_equal(ctx, spec);
  else if (c == "Tangent") lower_tangent(ctx, spec);
  else if (c == "Perpendicular") lower_perpendicular(ctx, spec);
  else if (c == "Parallel") lower_parallel(ctx, spec);
  else if (c == "Symmetric") lower_symmetric(ctx, spec);
  else if (c == "Fixed") lower_fixed(ctx, spec);
  else if (c == "Diameter") lower_diameter(ctx, spec);
  else if (c == "Distance") lower_distance(ctx, spec);
  else if (c == "Angle") lower_angle(ctx, spec);
  else if (c == "Above") lower_structural(ctx, spec, "above");
  else if (c == "Below") lower_structural(ctx, spec, "below");
  else if (c == "LeftOf") lower_structural(ctx, spec, "left_of");
  else if (c == "RightOf") lower_structural(ctx, spec, "right_of");
  else if (c == "Taller") lower_structural(ctx, spec, "taller");
  else if (c == "Wider") lower_structural(ctx, spec, "wider");
  else if (c == "CenterInside") lower_structural(ctx, spec, "center_inside");
  else
    throw ModelError{ModelError::Kind::BadArgument, "no lowering for '" + c + "'"};
  return std::move(ctx.out);
}

std::vector<Diagnostic> finalize_deferred(Model& m) {
  std::vector<Diagnostic> diags;
  if (m.root() == kNoId) return diags;

  std::size_t processed_boxes = 0;
  auto drain_boxes = [&]() {
    while (processed_boxes < m.bbox_instances().size()) {
      // add_noninversion only creates parameters, never new box instances
      const BBoxInstance box = m.bbox_instances()[processed_boxes];
      ++processed_boxes;
      auto ni = add_noninversion(m, box);
      for (auto& lc : ni) m.structure(box.structure).lowered.push_back(std::move(lc));
    }
  };

  std::vector<StructureId> order;
  std::vector<StructureId> work{m.root()};
  while (!work.empty()) {
    StructureId s = work.back();
    work.pop_back();
    order.push_back(s);
    const auto& ch = m.structure(s).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) work.push_back(*it);
  }

  for (StructureId s : order) {
    // implicit residual per arc: start and end stay equidistant from center
    for (GeoId gid : m.structure(s).geometry) {
      if (!m.geo(gid).is_arc()) continue;
      const auto& a = std::get<ArcGeo>(m.geo(gid).shape);
      ExprPool& p = m.pool();
      auto d2 = [&](GeoId from, GeoId to) {
        return p.add(p.square(p.sub(m.point_x(to), m.point_x(from))),
                     p.square(p.sub(m.point_y(to), m.point_y(from))));
      };
      LoweredConstraint lc;
      lc.owner = s;
      lc.kind = LoweredKind::ArcImplicit;
      lc.canonical = "arc";
      lc.residuals.push_back(p.sub(d2(a.center, a.start), d2(a.center, a.end)));
      m.structure(s).lowered.push_back(std::move(lc));
    }
    for (std::uint32_t i = 0; i < m.structure(s).constraints.size(); ++i) {
      try {
        LoweredConstraint lc = lower(m, s, i);
        m.structure(s).lowered.push_back(std::move(lc));
      } catch (const ModelError& e) {
        Diagnostic d;
        d.code = "E0010";
        d.severity = Severity::Error;
        d.message = e.message;
        d.path = m.path_of(s);
        const ConstraintSpec& spec = m.structure(s).constraints[i];
        d.file = spec.file;
        d.span = spec.span;
        diags.push_back(std::move(d));
      } catch (const DomainError& e) {
        Diagnostic d;
        d.code = "E0010";
        d.severity = Severity::Error;
        d.message = std::string("constraint is not evaluable at its initialization (") +
                    e.op + " of " + std::to_string(e.value) + ")";
        d.path = m.path_of(s);
        diags.push_back(std::move(d));
      }
      drain_boxes();
    }
  }
  // every structure carries its own non-inversion constraints
  for (StructureId s : order) {
    m.bounding_box(s, {});
    drain_boxes();
  }
  return diags;
}

}  // namespace aidl
