#include "elaborate.hpp"

#include <cmath>
#include <optional>

#include "../constraints.hpp"

namespace aidl::lang {

namespace {

struct Elaborator {
  Model& m;
  std::vector<Diagnostic>& diags;
  const std::string& file;

  void emit(const std::string& code, const SourceSpan& span, StructureId at,
            const std::string& msg) {
    Diagnostic d;
    d.code = code;
    d.severity = Severity::Error;
    d.message = msg;
    d.file = file;
    d.span = span;
    d.path = at == kNoId ? "" : m.path_of(at);
    diags.push_back(std::move(d));
  }

  void emit_model_error(const ModelError& e, const SourceSpan& span, StructureId at) {
    const char* code = "E0002";
    switch (e.kind) {
      case ModelError::Kind::DuplicateName: code = "E0003"; break;
      case ModelError::Kind::IllegalReference: code = "E0007"; break;
      case ModelError::Kind::BadArgument: code = "E0002"; break;
    }
    emit(code, span, at, e.message);
  }

  // Constant fold for initializers and literal coordinates.
  std::optional<double> const_eval(const AstExpr& e) {
    switch (e.kind) {
      case AstExpr::Kind::Number:
        return e.number;
      case AstExpr::Kind::Neg: {
        auto a = const_eval(*e.a);
        return a ? std::optional<double>(-*a) : std::nullopt;
      }
      case AstExpr::Kind::Binary: {
        auto a = const_eval(*e.a);
        auto b = const_eval(*e.b);
        if (!a || !b) return std::nullopt;
        switch (e.op) {
          case '+': return *a + *b;
          case '-': return *a - *b;
          case '*': return *a * *b;
          case '/': return std::fabs(*b) < kDivTolerance ? std::nullopt
                                                         : std::optional<double>(*a / *b);
        }
        return std::nullopt;
      }
      case AstExpr::Kind::Call: {
        std::vector<double> vals;
        for (const auto& it : e.items) {
          auto v = const_eval(it);
          if (!v) return std::nullopt;
          vals.push_back(*v);
        }
        try {
          if (vals.size() == 1) {
            if (e.call == "sin") return eval_unary(UnaryOp::Sin, vals[0]);
            if (e.call == "cos") return eval_unary(UnaryOp::Cos, vals[0]);
            if (e.call == "arcsin") return eval_unary(UnaryOp::Arcsin, vals[0]);
            if (e.call == "arccos") return eval_unary(UnaryOp::Arccos, vals[0]);
            if (e.call == "sqrt") return eval_unary(UnaryOp::Sqrt, vals[0]);
            if (e.call == "abs") return eval_unary(UnaryOp::Abs, vals[0]);
            if (e.call == "norm") return eval_unary(UnaryOp::Norm, vals[0]);
            if (e.call == "square") return eval_unary(UnaryOp::Square, vals[0]);
          } else if (vals.size() == 2) {
            if (e.call == "min") return eval_binary(BinaryOp::Min, vals[0], vals[1]);
            if (e.call == "max") return eval_binary(BinaryOp::Max, vals[0], vals[1]);
          }
        } catch (const DomainError&) {
          return std::nullopt;
        }
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }

  std::string path_string(const std::vector<std::string>& segs) {
    std::string out;
    for (const auto& s : segs) {
      if (!out.empty()) out += '.';
      out += s;
    }
    return out;
  }

  // Resolves a dotted path inside `scope`, reporting failures as diagnostics.
  std::optional<Resolved> resolve(StructureId scope, const AstExpr& path_expr) {
    try {
      return m.resolve_path(scope, path_expr.path);
    } catch (const ModelError& e) {
      emit("E0002", path_expr.span, scope, e.message);
      return std::nullopt;
    }
  }

  // Scalar expression for constraint bodies; keeps source paths for printing.
  SurfExprPtr scalar_expr(StructureId scope, const AstExpr& e, bool* ok) {
    switch (e.kind) {
      case AstExpr::Kind::Number:
        return SurfExpr::constant(e.number);
      case AstExpr::Kind::Neg: {
        auto a = scalar_expr(scope, *e.a, ok);
        return SurfExpr::unary(UnaryOp::Neg, std::move(a));
      }
      case AstExpr::Kind::Binary: {
        auto a = scalar_expr(scope, *e.a, ok);
        auto b = scalar_expr(scope, *e.b, ok);
        BinaryOp op = e.op == '+'   ? BinaryOp::Add
                      : e.op == '-' ? BinaryOp::Sub
                      : e.op == '*' ? BinaryOp::Mul
                                    : BinaryOp::Div;
        return SurfExpr::binary(op, std::move(a), std::move(b));
      }
      case AstExpr::Kind::Call: {
        static const std::pair<const char*, UnaryOp> unary_fns[] = {
            {"sin", UnaryOp::Sin},       {"cos", UnaryOp::Cos},
            {"arcsin", UnaryOp::Arcsin}, {"arccos", UnaryOp::Arccos},
            {"sqrt", UnaryOp::Sqrt},     {"abs", UnaryOp::Abs},
            {"norm", UnaryOp::Norm},     {"square", UnaryOp::Square},
        };
        for (const auto& [name, op] : unary_fns) {
          if (e.call == name) {
            if (e.items.size() != 1) {
              emit("E0006", e.span, scope, e.call + " takes one argument");
              *ok = false;
              return SurfExpr::constant(0);
            }
            return SurfExpr::unary(op, scalar_expr(scope, e.items[0], ok));
          }
        }
        if (e.call == "min" || e.call == "max") {
          if (e.items.size() != 2) {
            emit("E0006", e.span, scope, e.call + " takes two arguments");
            *ok = false;
            return SurfExpr::constant(0);
          }
          return SurfExpr::binary(e.call == "min" ? BinaryOp::Min : BinaryOp::Max,
                                  scalar_expr(scope, e.items[0], ok),
                                  scalar_expr(scope, e.items[1], ok));
        }
        emit("E0002", e.span, scope, "unknown function '" + e.call + "'");
        *ok = false;
        return SurfExpr::constant(0);
      }
      case AstExpr::Kind::Path: {
        auto r = resolve(scope, e);
        if (!r) {
          *ok = false;
          return SurfExpr::constant(0);
        }
        switch (r->kind) {
          case Resolved::Kind::Param: {
            auto se = SurfExpr::wrap(m.pool().param(r->param));
            const_cast<SurfExpr*>(se.get())->display = path_string(e.path);
            return se;
          }
          case Resolved::Kind::Derived: {
            auto se = SurfExpr::wrap(r->derived);
            const_cast<SurfExpr*>(se.get())->display = path_string(e.path);
            return se;
          }
          case Resolved::Kind::BBoxSide:
            return SurfExpr::bbox(r->structure, r->side);
          default:
            emit("E0006", e.span, scope,
                 "'" + path_string(e.path) + "' is not a numeric value");
            *ok = false;
            return SurfExpr::constant(0);
        }
      }
      default:
        emit("E0001", e.span, scope, "expression not allowed here");
        *ok = false;
        return SurfExpr::constant(0);
    }
  }

  SurfExprPtr logical_expr(StructureId scope, const AstExpr& e, bool* ok) {
    if (e.kind == AstExpr::Kind::And)
      return SurfExpr::conjunction(logical_expr(scope, *e.a, ok),
                                   logical_expr(scope, *e.b, ok));
    if (e.kind == AstExpr::Kind::Cmp)
      return SurfExpr::compare(e.cmp, scalar_expr(scope, *e.a, ok),
                               scalar_expr(scope, *e.b, ok));
    emit("E0001", e.span, scope, "constraint must compare two expressions");
    *ok = false;
    return SurfExpr::constant(0);
  }

  // Point argument of a constructor: existing point path or literal tuple.
  GeoId point_arg(StructureId scope, const std::string& owner_name, const char* role,
                  const AstExpr& v, bool* ok) {
    if (v.kind == AstExpr::Kind::Tuple) {
      auto x = const_eval(v.items[0]);
      auto y = const_eval(v.items[1]);
      if (!x || !y) {
        emit("E0006", v.span, scope, "coordinates must be numeric");
        *ok = false;
        return kNoId;
      }
      try {
        return m.add_point(scope, owner_name + "." + role, *x, *y, true);
      } catch (const ModelError& e) {
        emit_model_error(e, v.span, scope);
        *ok = false;
        return kNoId;
      }
    }
    if (v.kind == AstExpr::Kind::Path) {
      auto r = resolve(scope, v);
      if (!r) {
        *ok = false;
        return kNoId;
      }
      if (r->kind == Resolved::Kind::Geometry && m.geo(r->geo).is_point()) return r->geo;
      emit("E0006", v.span, scope,
           "'" + path_string(v.path) + "' must be a Point or a coordinate pair");
      *ok = false;
      return kNoId;
    }
    emit("E0006", v.span, scope, std::string(role) + " must be a Point or a coordinate pair");
    *ok = false;
    return kNoId;
  }

  const AstExpr* find_arg(const AstGeoDecl& d, const char* name) {
    for (const auto& a : d.args)
      if (a.name == name) return &a.value;
    return nullptr;
  }

  bool check_args(StructureId scope, const AstGeoDecl& d,
                  std::initializer_list<const char*> allowed) {
    bool ok = true;
    for (const auto& a : d.args) {
      bool known = false;
      for (const char* n : allowed)
        if (a.name == n) known = true;
      if (!known) {
        emit("E0006", a.span, scope,
             d.ctor + " has no argument '" + a.name + "'");
        ok = false;
      }
    }
    return ok;
  }

  void geo_decl(StructureId scope, const AstGeoDecl& d) {
    static const std::pair<const char*, const char*> kw_ctor[] = {
        {"point", "Point"},   {"line", "Line"},         {"arc", "Arc"},
        {"circle", "Circle"}, {"rect", "Rectangle"},    {"triangle", "Triangle"},
    };
    const char* expected = nullptr;
    for (const auto& [kw, ctor] : kw_ctor)
      if (d.keyword == kw) expected = ctor;
    if (!expected || d.ctor != expected) {
      emit("E0006", d.span, scope,
           "'" + d.keyword + "' declarations use the " +
               (expected ? expected : "matching") + " constructor");
      return;
    }
    bool ok = true;
    try {
      if (d.ctor == "Point") {
        check_args(scope, d, {"x", "y"});
        const AstExpr* xa = find_arg(d, "x");
        const AstExpr* ya = find_arg(d, "y");
        if (!xa || !ya) {
          emit("E0006", d.span, scope, "Point needs x and y");
          return;
        }
        // a coordinate may share an existing parameter by reference
        auto coord = [&](const AstExpr& e, std::optional<ParamId>& shared,
                         double& val) -> bool {
          if (e.kind == AstExpr::Kind::Path) {
            auto r = resolve(scope, e);
            if (!r) return false;
            if (r->kind == Resolved::Kind::Param) {
              shared = r->param;
              return true;
            }
            emit("E0006", e.span, scope,
                 "'" + path_string(e.path) + "' is not a parameter");
            return false;
          }
          auto v = const_eval(e);
          if (!v) {
            emit("E0006", e.span, scope, "coordinates must be numeric or parameter references");
            return false;
          }
          val = *v;
          return true;
        };
        std::optional<ParamId> sx, sy;
        double vx = 0, vy = 0;
        if (!coord(*xa, sx, vx) || !coord(*ya, sy, vy)) return;
        m.add_point_sharing(scope, d.name, sx, vx, sy, vy);
      } else if (d.ctor == "Line") {
        check_args(scope, d, {"start", "end"});
        const AstExpr* s = find_arg(d, "start");
        const AstExpr* e = find_arg(d, "end");
        if (!s || !e) {
          emit("E0006", d.span, scope, "Line needs start and end");
          return;
        }
        GeoId ps = point_arg(scope, d.name, "start", *s, &ok);
        GeoId pe = point_arg(scope, d.name, "end", *e, &ok);
        if (ok) m.add_line(scope, d.name, ps, pe);
      } else if (d.ctor == "Arc") {
        check_args(scope, d, {"center", "start", "end"});
        const AstExpr* c = find_arg(d, "center");
        const AstExpr* s = find_arg(d, "start");
        const AstExpr* e = find_arg(d, "end");
        if (!c || !s || !e) {
          emit("E0006", d.span, scope, "Arc needs center, start and end");
          return;
        }
        GeoId pc = point_arg(scope, d.name, "center", *c, &ok);
        GeoId ps = point_arg(scope, d.name, "start", *s, &ok);
        GeoId pe = point_arg(scope, d.name, "end", *e, &ok);
        if (ok) m.add_arc(scope, d.name, pc, ps, pe);
      } else if (d.ctor == "Circle") {
        check_args(scope, d, {"center", "radius"});
        const AstExpr* c = find_arg(d, "center");
        const AstExpr* r = find_arg(d, "radius");
        if (!c || !r) {
          emit("E0006", d.span, scope, "Circle needs center and radius");
          return;
        }
        GeoId pc = point_arg(scope, d.name, "center", *c, &ok);
        if (!ok) return;
        if (r->kind == AstExpr::Kind::Path) {
          auto rr = resolve(scope, *r);
          if (!rr) return;
          if (rr->kind != Resolved::Kind::Param) {
            emit("E0006", r->span, scope, "radius must be a number or a parameter reference");
            return;
          }
          m.add_circle(scope, d.name, pc, rr->param);
        } else {
          auto v = const_eval(*r);
          if (!v) {
            emit("E0006", r->span, scope, "radius must be a number or a parameter reference");
            return;
          }
          m.add_circle(scope, d.name, pc, *v);
        }
      } else if (d.ctor == "Rectangle") {
        check_args(scope, d, {"origin", "center", "width", "height"});
        const AstExpr* origin = find_arg(d, "origin");
        const AstExpr* center = find_arg(d, "center");
        const AstExpr* w = find_arg(d, "width");
        const AstExpr* h = find_arg(d, "height");
        if ((!origin && !center) || !w || !h) {
          emit("E0006", d.span, scope, "Rectangle needs origin (or center), width and height");
          return;
        }
        auto wv = const_eval(*w);
        auto hv = const_eval(*h);
        if (!wv || !hv) {
          emit("E0006", d.span, scope, "width and height must be numeric");
          return;
        }
        const AstExpr* anchor = origin ? origin : center;
        if (anchor->kind == AstExpr::Kind::Path) {
          if (center) {
            emit("E0006", anchor->span, scope, "center form takes coordinates, not a point");
            return;
          }
          auto r = resolve(scope, *anchor);
          if (!r) return;
          if (r->kind != Resolved::Kind::Geometry || !m.geo(r->geo).is_point()) {
            emit("E0006", anchor->span, scope, "origin must be a Point or a coordinate pair");
            return;
          }
          GeoId rect = m.add_rectangle(scope, d.name, r->geo, *wv, *hv);
          m.flatten_compounds(scope);
          (void)rect;
        } else if (anchor->kind == AstExpr::Kind::Tuple) {
          auto x = const_eval(anchor->items[0]);
          auto y = const_eval(anchor->items[1]);
          if (!x || !y) {
            emit("E0006", anchor->span, scope, "coordinates must be numeric");
            return;
          }
          m.add_rectangle(scope, d.name, *x, *y, *wv, *hv, center != nullptr);
          m.flatten_compounds(scope);
        } else {
          emit("E0006", anchor->span, scope, "origin must be a Point or a coordinate pair");
          return;
        }
      } else {  // Triangle
        check_args(scope, d, {"pt_a", "pt_b", "pt_c", "center", "base", "height"});
        const AstExpr* pa = find_arg(d, "pt_a");
        const AstExpr* pb = find_arg(d, "pt_b");
        const AstExpr* pc = find_arg(d, "pt_c");
        const AstExpr* center = find_arg(d, "center");
        if (pa && pb && pc) {
          // mixed path/tuple arguments allowed
          bool by_ref = pa->kind == AstExpr::Kind::Path && pb->kind == AstExpr::Kind::Path &&
                        pc->kind == AstExpr::Kind::Path;
          if (by_ref) {
            auto ra = resolve(scope, *pa);
            auto rb = resolve(scope, *pb);
            auto rc = resolve(scope, *pc);
            if (!ra || !rb || !rc) return;
            m.add_triangle(scope, d.name, ra->geo, rb->geo, rc->geo);
          } else {
            GeoId ga = point_arg(scope, d.name, "pt_a", *pa, &ok);
            GeoId gb = point_arg(scope, d.name, "pt_b", *pb, &ok);
            GeoId gc = point_arg(scope, d.name, "pt_c", *pc, &ok);
            if (!ok) return;
            m.add_triangle(scope, d.name, ga, gb, gc);
          }
          m.flatten_compounds(scope);
        } else if (center) {
          const AstExpr* base = find_arg(d, "base");
          const AstExpr* height = find_arg(d, "height");
          if (!base || !height || center->kind != AstExpr::Kind::Tuple) {
            emit("E0006", d.span, scope,
                 "Triangle takes pt_a/pt_b/pt_c or center=(x, y), base, height");
            return;
          }
          auto cx = const_eval(center->items[0]);
          auto cy = const_eval(center->items[1]);
          auto bv = const_eval(*base);
          auto hv = const_eval(*height);
          if (!cx || !cy || !bv || !hv) {
            emit("E0006", d.span, scope, "Triangle center, base and height must be numeric");
            return;
          }
          m.add_triangle(scope, d.name, *cx, *cy, *bv, *hv);
          m.flatten_compounds(scope);
        } else {
          emit("E0006", d.span, scope,
               "Triangle takes pt_a/pt_b/pt_c or center=(x, y), base, height");
          return;
        }
      }
    } catch (const ModelError& e) {
      emit_model_error(e, d.span, scope);
    }
  }

  void constrain_stmt(StructureId scope, const AstConstrain& c) {
    ConstraintSpec spec;
    spec.file = file;
    spec.span = c.span;
    bool ok = true;
    if (c.is_call) {
      SynonymResolution res = resolve_synonym(c.name);
      if (!res.found) {
        emit("E0005", c.span, scope,
             "unknown constraint '" + c.name + "'; did you mean '" + res.suggestion + "'?");
        return;
      }
      spec.surface = c.name;
      spec.canonical = res.canonical;
      for (const AstExpr& a : c.args) {
        if (a.kind == AstExpr::Kind::Path) {
          auto r = resolve(scope, a);
          if (!r) {
            ok = false;
            continue;
          }
          switch (r->kind) {
            case Resolved::Kind::Structure:
              spec.args.push_back(ConstraintArg::struct_ref(r->structure));
              break;
            case Resolved::Kind::Geometry:
              spec.args.push_back(ConstraintArg::geometry(r->geo));
              break;
            case Resolved::Kind::Param: {
              ConstraintArg arg = ConstraintArg::param_ref(r->param);
              spec.args.push_back(arg);
              break;
            }
            case Resolved::Kind::Derived: {
              auto se = SurfExpr::wrap(r->derived);
              const_cast<SurfExpr*>(se.get())->display = path_string(a.path);
              spec.args.push_back(ConstraintArg::scalar_expr(std::move(se)));
              break;
            }
            case Resolved::Kind::BBoxSide:
              spec.args.push_back(
                  ConstraintArg::scalar_expr(SurfExpr::bbox(r->structure, r->side)));
              break;
          }
        } else {
          spec.args.push_back(ConstraintArg::scalar_expr(scalar_expr(scope, a, &ok)));
        }
      }
      if (!ok) return;
      if (std::string err = check_signature(m, spec); !err.empty()) {
        emit("E0006", c.span, scope, err);
        return;
      }
    } else {
      spec.equation = logical_expr(scope, *c.equation, &ok);
      if (!ok) return;
    }
    m.add_constraint(scope, std::move(spec));
  }

  void walk(StructureId scope, const AstStructure& s) {
    for (const AstStmt& stmt : s.body) {
      switch (stmt.kind) {
        case AstStmt::Kind::Param: {
          const AstParamDecl& d = *stmt.param;
          auto v = const_eval(d.init);
          if (!v) {
            emit("E0006", d.span, scope,
                 "parameter initializer must be constant; use a constraint for dependent values");
            break;
          }
          try {
            m.add_parameter(scope, d.name, *v, !d.fixed, ParamRole::User);
          } catch (const ModelError& e) {
            emit_model_error(e, d.span, scope);
          }
          break;
        }
        case AstStmt::Kind::Geo:
          geo_decl(scope, *stmt.geo);
          break;
        case AstStmt::Kind::Constrain:
          constrain_stmt(scope, *stmt.constrain);
          break;
        case AstStmt::Kind::Structure: {
          const AstStructure& child = *stmt.structure;
          auto type = parse_structure_type(child.type);
          if (!type) {
            emit("E0002", child.span, scope, "unknown structure type '" + child.type + "'");
            break;
          }
          Orientation orient = Orientation::Top;
          if (!child.orientation.empty()) orient = *parse_orientation(child.orientation);
          double tx = 0, ty = 0;
          if (child.has_at) {
            auto x = const_eval(child.at_x);
            auto y = const_eval(child.at_y);
            if (!x || !y) {
              emit("E0006", child.span, scope, "'at' coordinates must be numeric");
              break;
            }
            tx = *x;
            ty = *y;
          }
          try {
            StructureId id = m.add_structure(scope, child.name, *type, orient, tx, ty);
            walk(id, child);
          } catch (const ModelError& e) {
            emit_model_error(e, child.span, scope);
          }
          break;
        }
      }
    }
  }
};

}  // namespace

ElaborateResult elaborate(const AstUnit& unit, const std::string& file) {
  ElaborateResult result;
  result.model = std::make_unique<Model>();
  if (!unit.root) return result;

  Elaborator el{*result.model, result.diagnostics, file};
  const AstStructure& r = *unit.root;
  auto type = parse_structure_type(r.type);
  if (!type) {
    el.emit("E0002", r.span, kNoId, "unknown structure type '" + r.type + "'");
    return result;
  }
  if (r.has_at) {
    el.emit("E0012", r.span, kNoId, "the root structure has no translation frame");
    return result;
  }
  Orientation orient = Orientation::Top;
  if (!r.orientation.empty()) orient = *parse_orientation(r.orientation);
  StructureId root = result.model->add_root(r.name, *type, orient);
  el.walk(root, r);

  auto vd = result.model->validate();
  for (auto& d : vd) {
    d.file = file;
    result.diagnostics.push_back(std::move(d));
  }
  return result;
}

}  // namespace aidl::lang
