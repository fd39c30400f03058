#include "format.hpp"

#include "../numfmt.hpp"

namespace aidl::lang {

namespace {

// chain of structure names strictly below `scope` down to `target`
std::string rel_struct_path(const Model& m, StructureId target, StructureId scope) {
  if (target == scope) return m.structure(target).name;
  std::vector<const std::string*> parts;
  for (StructureId cur = target; cur != scope && cur != kNoId;
       cur = m.structure(cur).parent)
    parts.push_back(&m.structure(cur).name);
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out += '.';
    out += **it;
  }
  return out;
}

std::string rel_geo_path(const Model& m, GeoId g, StructureId scope) {
  const Geometry& geo = m.geo(g);
  if (geo.owner == scope) return geo.name;
  return rel_struct_path(m, geo.owner, scope) + "." + geo.name;
}

std::string rel_param_path(const Model& m, ParamId p, StructureId scope) {
  const ParamMeta& meta = m.param_meta(p);
  if (meta.owner == scope) return meta.name;
  return rel_struct_path(m, meta.owner, scope) + "." + meta.name;
}

// precedence: 1 = additive, 2 = multiplicative, 3 = atom
int pool_prec(const Model& m, ExprId e) {
  const ExprNode& n = m.pool().node(e);
  if (n.kind == ExprKind::Binary) {
    auto op = static_cast<BinaryOp>(n.op);
    if (op == BinaryOp::Add || op == BinaryOp::Sub) return 1;
    if (op == BinaryOp::Mul || op == BinaryOp::Div) return 2;
  }
  return 3;
}

std::string pool_infix(const Model& m, ExprId e, StructureId scope);

std::string pool_child(const Model& m, ExprId e, StructureId scope, int parent_prec,
                       bool rhs) {
  int p = pool_prec(m, e);
  std::string s = pool_infix(m, e, scope);
  if (p < parent_prec || (rhs && p == parent_prec)) return "(" + s + ")";
  return s;
}

std::string pool_infix(const Model& m, ExprId e, StructureId scope) {
  const ExprNode& n = m.pool().node(e);
  switch (n.kind) {
    case ExprKind::Const:
      return fmt_double(n.value);
    case ExprKind::Param:
      return rel_param_path(m, n.param, scope);
    case ExprKind::Unary: {
      auto op = static_cast<UnaryOp>(n.op);
      if (op == UnaryOp::Neg) {
        std::string a = pool_infix(m, n.a, scope);
        if (pool_prec(m, n.a) < 3) return "-(" + a + ")";
        return "-" + a;
      }
      return std::string(unary_op_name(op)) + "(" + pool_infix(m, n.a, scope) + ")";
    }
    case ExprKind::Binary: {
      auto op = static_cast<BinaryOp>(n.op);
      if (op == BinaryOp::Min || op == BinaryOp::Max)
        return std::string(binary_op_name(op)) + "(" + pool_infix(m, n.a, scope) + ", " +
               pool_infix(m, n.b, scope) + ")";
      int prec = (op == BinaryOp::Add || op == BinaryOp::Sub) ? 1 : 2;
      const char* sym = op == BinaryOp::Add ? " + "
                        : op == BinaryOp::Sub ? " - "
                        : op == BinaryOp::Mul ? " * "
                                              : " / ";
      return pool_child(m, n.a, scope, prec, false) + sym +
             pool_child(m, n.b, scope, prec, true);
    }
  }
  return "0";
}

int surf_prec(const SurfExpr& e) {
  if (e.kind == SurfExpr::Kind::Binary) {
    if (e.bop == BinaryOp::Add || e.bop == BinaryOp::Sub) return 1;
    if (e.bop == BinaryOp::Mul || e.bop == BinaryOp::Div) return 2;
  }
  return 3;
}

std::string surf_print(const Model& m, const SurfExprPtr& e, StructureId scope);

std::string surf_child(const Model& m, const SurfExprPtr& e, StructureId scope,
                       int parent_prec, bool rhs) {
  int p = surf_prec(*e);
  std::string s = surf_print(m, e, scope);
  if (p < parent_prec || (rhs && p == parent_prec)) return "(" + s + ")";
  return s;
}

std::string surf_print(const Model& m, const SurfExprPtr& e, StructureId scope) {
  switch (e->kind) {
    case SurfExpr::Kind::Const:
      return fmt_double(e->value);
    case SurfExpr::Kind::Expr:
      if (!e->display.empty()) return e->display;
      return pool_infix(m, e->expr, scope);
    case SurfExpr::Kind::BBoxSide:
      return rel_struct_path(m, e->bb_struct, scope) + ".bb." + bbox_side_name(e->side);
    case SurfExpr::Kind::Unary: {
      if (e->uop == UnaryOp::Neg) {
        std::string a = surf_print(m, e->a, scope);
        if (surf_prec(*e->a) < 3) return "-(" + a + ")";
        return "-" + a;
      }
      return std::string(unary_op_name(e->uop)) + "(" + surf_print(m, e->a, scope) + ")";
    }
    case SurfExpr::Kind::Binary: {
      if (e->bop == BinaryOp::Min || e->bop == BinaryOp::Max)
        return std::string(binary_op_name(e->bop)) + "(" + surf_print(m, e->a, scope) +
               ", " + surf_print(m, e->b, scope) + ")";
      int prec = (e->bop == BinaryOp::Add || e->bop == BinaryOp::Sub) ? 1 : 2;
      const char* sym = e->bop == BinaryOp::Add ? " + "
                        : e->bop == BinaryOp::Sub ? " - "
                        : e->bop == BinaryOp::Mul ? " * "
                                                  : " / ";
      return surf_child(m, e->a, scope, prec, false) + sym +
             surf_child(m, e->b, scope, prec, true);
    }
    case SurfExpr::Kind::Cmp: {
      const char* sym = e->cmp == CmpOp::Eq ? " == " : e->cmp == CmpOp::Le ? " <= " : " >= ";
      return surf_print(m, e->a, scope) + sym + surf_print(m, e->b, scope);
    }
    case SurfExpr::Kind::And:
      return surf_print(m, e->a, scope) + " && " + surf_print(m, e->b, scope);
  }
  return "0";
}

struct Writer {
  const Model& m;
  std::string out;
  int depth = 0;

  void indent() { out.append(static_cast<std::size_t>(depth) * 2, ' '); }
  void line(const std::string& s) {
    indent();
    out += s;
    out += '\n';
  }

  std::string point_ref(GeoId pt, const std::string& owner_geo_name, const char* role,
                        StructureId scope) {
    const Geometry& g = m.geo(pt);
    if (g.synthetic && g.name == owner_geo_name + "." + role) {
      const auto& p = std::get<PointGeo>(g.shape);
      return "(" + fmt_double(m.value(p.x)) + ", " + fmt_double(m.value(p.y)) + ")";
    }
    return rel_geo_path(m, pt, scope);
  }

  std::string coord(ParamId p) {
    const ParamMeta& meta = m.param_meta(p);
    if (meta.role == ParamRole::User) return meta.name;
    return fmt_double(m.value(p));
  }

  void geometry(StructureId sid, GeoId gid) {
    const Geometry& g = m.geo(gid);
    if (g.synthetic) return;  // printed through its compound / owner
    if (g.is_point()) {
      const auto& p = std::get<PointGeo>(g.shape);
      line("point " + g.name + " = Point(x=" + coord(p.x) + ", y=" + coord(p.y) + ")");
    } else if (g.is_line()) {
      const auto& l = std::get<LineGeo>(g.shape);
      line("line " + g.name + " = Line(start=" + point_ref(l.start, g.name, "start", sid) +
           ", end=" + point_ref(l.end, g.name, "end", sid) + ")");
    } else if (g.is_arc()) {
      const auto& a = std::get<ArcGeo>(g.shape);
      line("arc " + g.name + " = Arc(center=" + point_ref(a.center, g.name, "center", sid) +
           ", start=" + point_ref(a.start, g.name, "start", sid) +
           ", end=" + point_ref(a.end, g.name, "end", sid) + ")");
    } else if (g.is_circle()) {
      const auto& c = std::get<CircleGeo>(g.shape);
      std::string radius = m.param_meta(c.radius).role == ParamRole::User
                               ? m.param_meta(c.radius).name
                               : fmt_double(m.value(c.radius));
      line("circle " + g.name + " = Circle(center=" + point_ref(c.center, g.name, "center", sid) +
           ", radius=" + radius + ")");
    } else {
      const auto& c = std::get<CompoundGeo>(g.shape);
      if (c.kind == CompoundKind::Rectangle) {
        std::string origin;
        if (c.anchored_by_ref) {
          origin = rel_geo_path(m, c.anchor_points[0], sid);
        } else {
          const auto& bl = std::get<PointGeo>(m.geo(c.members[0].geo).shape);
          origin = "(" + fmt_double(m.value(bl.x)) + ", " + fmt_double(m.value(bl.y)) + ")";
        }
        line("rect " + g.name + " = Rectangle(origin=" + origin +
             ", width=" + fmt_double(c.w0) + ", height=" + fmt_double(c.h0) + ")");
      } else {
        std::string pts[3];
        for (int i = 0; i < 3; ++i) {
          GeoId pg = c.members[static_cast<std::size_t>(i)].geo;
          const Geometry& pgeo = m.geo(pg);
          if (pgeo.synthetic) {
            const auto& pp = std::get<PointGeo>(pgeo.shape);
            pts[i] = "(" + fmt_double(m.value(pp.x)) + ", " + fmt_double(m.value(pp.y)) + ")";
          } else {
            pts[i] = rel_geo_path(m, pg, sid);
          }
        }
        line("triangle " + g.name + " = Triangle(pt_a=" + pts[0] + ", pt_b=" + pts[1] +
             ", pt_c=" + pts[2] + ")");
      }
    }
  }

  void constraint(StructureId sid, const ConstraintSpec& c) {
    if (c.canonical.empty()) {
      line("constrain " + surf_print(m, c.equation, sid));
      return;
    }
    std::string args;
    for (const ConstraintArg& a : c.args) {
      if (!args.empty()) args += ", ";
      switch (a.kind) {
        case ConstraintArg::Kind::Geometry: args += rel_geo_path(m, a.geo, sid); break;
        case ConstraintArg::Kind::Structure: args += rel_struct_path(m, a.structure, sid); break;
        case ConstraintArg::Kind::Param: args += rel_param_path(m, a.param, sid); break;
        case ConstraintArg::Kind::Scalar: args += surf_print(m, a.scalar, sid); break;
      }
    }
    line("constrain " + c.canonical + "(" + args + ")");
  }

  void structure(StructureId sid) {
    const Structure& s = m.structure(sid);
    std::string head = "structure " + s.name + " : " +
                       structure_type_name(s.frame.type);
    if (s.frame.orientation != Orientation::Top)
      head += std::string(" ") + orientation_name(s.frame.orientation);
    if (s.frame.tx != kNoId) {
      double tx = m.value(s.frame.tx);
      double ty = m.value(s.frame.ty);
      if (tx != 0.0 || ty != 0.0)
        head += " at (" + fmt_double(tx) + ", " + fmt_double(ty) + ")";
    }
    bool empty = s.params.empty() && s.children.empty() && s.constraints.empty();
    if (empty)
      for (GeoId g : s.geometry)
        if (!m.geo(g).synthetic) empty = false;
    if (empty) {
      line(head + " { }");
      return;
    }
    line(head + " {");
    ++depth;
    for (ParamId p : s.params) {
      std::string decl = "param " + m.param_meta(p).name + " = " + fmt_double(m.value(p));
      if (!m.param_meta(p).is_mutable) decl += " fixed";
      line(decl);
    }
    for (GeoId g : s.geometry) geometry(sid, g);
    for (StructureId c : s.children) structure(c);
    for (const ConstraintSpec& c : s.constraints) constraint(sid, c);
    --depth;
    line("}");
  }
};

}  // namespace

std::string format(const Model& m) {
  if (m.root() == kNoId) return "";
  Writer w{m, "", 0};
  w.structure(m.root());
  return w.out;
}

}  // namespace aidl::lang
