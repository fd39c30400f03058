#include "jsonout.hpp"

#include <cstdio>
#include <limits>

#include "numfmt.hpp"

namespace aidl {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string diagnostic_json(const Diagnostic& d) {
  std::string out = "{";
  out += "\"code\":\"" + json_escape(d.code) + "\",";
  out += "\"severity\":\"" + std::string(severity_name(d.severity)) + "\",";
  out += "\"message\":\"" + json_escape(d.message) + "\",";
  out += "\"file\":\"" + json_escape(d.file) + "\",";
  out += "\"line\":" + std::to_string(d.span.line) + ",";
  out += "\"col\":" + std::to_string(d.span.col) + ",";
  out += "\"end_line\":" + std::to_string(d.span.end_line) + ",";
  out += "\"end_col\":" + std::to_string(d.span.end_col) + ",";
  out += "\"path\":\"" + json_escape(d.path) + "\"}";
  return out;
}

std::string diagnostic_human(const Diagnostic& d) {
  std::string out;
  if (!d.file.empty()) {
    out += d.file;
    if (d.span.line > 0)
      out += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col);
    out += ": ";
  }
  out += severity_name(d.severity);
  out += " [" + d.code + "] " + d.message;
  if (!d.path.empty()) out += " (at " + d.path + ")";
  return out;
}

namespace {

struct JsonWriter {
  Model& m;
  Evaluator ev;
  std::string out;

  explicit JsonWriter(Model& model) : m(model), ev(model.pool(), model.values()) {}

  void raw(const char* s) { out += s; }
  void raw(const std::string& s) { out += s; }
  void key(const char* k) {
    out += '"';
    out += k;
    out += "\":";
  }
  void str(const std::string& s) { out += '"' + json_escape(s) + '"'; }
  void num(double v) { out += fmt_double(v); }

  std::string sexpr(ExprId e) {
    return to_sexpr(m.pool(), e, [this](ParamId p) { return m.param_path(p); });
  }

  void geometry(GeoId gid) {
    const Geometry& g = m.geo(gid);
    raw("{");
    key("name");
    str(g.name);
    if (g.is_point()) {
      const auto& p = std::get<PointGeo>(g.shape);
      raw(",\"kind\":\"point\",\"x\":");
      num(m.value(p.x));
      raw(",\"y\":");
      num(m.value(p.y));
    } else if (g.is_line()) {
      const auto& l = std::get<LineGeo>(g.shape);
      raw(",\"kind\":\"line\",");
      key("start");
      str(m.geo(l.start).name);
      raw(",");
      key("end");
      str(m.geo(l.end).name);
      raw(",\"length\":");
      num(ev.eval(m.line_length(gid)));
    } else if (g.is_arc()) {
      const auto& a = std::get<ArcGeo>(g.shape);
      raw(",\"kind\":\"arc\",");
      key("center");
      str(m.geo(a.center).name);
      raw(",");
      key("start");
      str(m.geo(a.start).name);
      raw(",");
      key("end");
      str(m.geo(a.end).name);
      raw(",\"radius\":");
      num(ev.eval(m.circle_radius_expr(gid)));
    } else if (g.is_circle()) {
      const auto& c = std::get<CircleGeo>(g.shape);
      raw(",\"kind\":\"circle\",");
      key("center");
      str(m.geo(c.center).name);
      raw(",\"radius\":");
      num(m.value(c.radius));
      raw(",\"diameter\":");
      num(2.0 * m.value(c.radius));
    } else {
      const auto& c = std::get<CompoundGeo>(g.shape);
      raw(c.kind == CompoundKind::Rectangle ? ",\"kind\":\"rectangle\",\"members\":["
                                            : ",\"kind\":\"triangle\",\"members\":[");
      bool first = true;
      for (const auto& mem : c.members) {
        if (!first) raw(",");
        first = false;
        str(mem.name);
      }
      raw("]");
    }
    raw("}");
  }

  void structure(StructureId sid) {
    const Structure& s = m.structure(sid);
    ev.rebind(m.values());  // parameter storage may have grown
    raw("{");
    key("name");
    str(s.name);
    raw(",");
    key("type");
    str(structure_type_name(s.frame.type));
    raw(",");
    key("orientation");
    str(orientation_name(s.frame.orientation));
    raw(",\"frame\":{\"tx\":");
    num(s.frame.tx == kNoId ? 0.0 : m.value(s.frame.tx));
    raw(",\"ty\":");
    num(s.frame.ty == kNoId ? 0.0 : m.value(s.frame.ty));
    raw("},\"parameters\":[");
    for (std::size_t i = 0; i < s.params.size(); ++i) {
      if (i) raw(",");
      const ParamMeta& meta = m.param_meta(s.params[i]);
      raw("{\"name\":");
      str(meta.name);
      raw(",\"value\":");
      num(m.value(s.params[i]));
      raw(",\"mutable\":");
      raw(meta.is_mutable ? "true" : "false");
      raw("}");
    }
    raw("],\"geometry\":[");
    for (std::size_t i = 0; i < s.geometry.size(); ++i) {
      if (i) raw(",");
      geometry(s.geometry[i]);
    }
    raw("],\"constraints\":[");
    bool first = true;
    for (const LoweredConstraint& lc : s.lowered) {
      if (lc.kind != LoweredKind::UserConstraint) continue;
      if (!first) raw(",");
      first = false;
      raw("{\"name\":");
      str(lc.canonical);
      raw(",\"residuals\":[");
      for (std::size_t i = 0; i < lc.residuals.size(); ++i) {
        if (i) raw(",");
        str(sexpr(lc.residuals[i]));
      }
      raw("],\"values\":[");
      for (std::size_t i = 0; i < lc.residuals.size(); ++i) {
        if (i) raw(",");
        double v = 0;
        try {
          v = ev.eval(lc.residuals[i]);
        } catch (const DomainError&) {
          v = std::numeric_limits<double>::quiet_NaN();
        }
        num(v);
      }
      raw("],\"slacks\":[");
      for (std::size_t i = 0; i < lc.slacks.size(); ++i) {
        if (i) raw(",");
        str(m.param_meta(lc.slacks[i]).name);
      }
      raw("]}");
    }
    raw("],\"children\":[");
    for (std::size_t i = 0; i < s.children.size(); ++i) {
      if (i) raw(",");
      structure(s.children[i]);
    }
    raw("],\"bbox\":");
    const BBoxInstance& box = m.bounding_box(sid, {});
    ev.rebind(m.values());  // a virtual box may have added parameters
    auto side = [&](ExprId e) {
      try {
        return ev.eval(e);
      } catch (const DomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    raw("{\"left\":");
    num(side(box.left));
    raw(",\"right\":");
    num(side(box.right));
    raw(",\"top\":");
    num(side(box.top));
    raw(",\"bottom\":");
    num(side(box.bottom));
    raw("}}");
  }

  void vec(const geobool::Vec2& v) {
    raw("[");
    num(v.x);
    raw(",");
    num(v.y);
    raw("]");
  }

  void ring(const geobool::Ring& r) {
    raw("[");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) raw(",");
      vec(r[i]);
    }
    raw("]");
  }

  void scene(const geobool::SceneOutput& sc) {
    raw("{\"faces\":[");
    for (std::size_t i = 0; i < sc.faces.size(); ++i) {
      if (i) raw(",");
      raw("{\"provenance\":");
      str(sc.faces[i].provenance);
      raw(",\"outer\":");
      ring(sc.faces[i].outer);
      raw(",\"holes\":[");
      for (std::size_t h = 0; h < sc.faces[i].holes.size(); ++h) {
        if (h) raw(",");
        ring(sc.faces[i].holes[h]);
      }
      raw("]}");
    }
    raw("],\"drawing_edges\":[");
    for (std::size_t i = 0; i < sc.drawing_edges.size(); ++i) {
      if (i) raw(",");
      const geobool::Segment& e = sc.drawing_edges[i];
      switch (e.kind) {
        case geobool::Segment::Kind::Line:
          raw("{\"kind\":\"line\",\"start\":");
          vec(e.a);
          raw(",\"end\":");
          vec(e.b);
          raw("}");
          break;
        case geobool::Segment::Kind::Arc:
          raw("{\"kind\":\"arc\",\"center\":");
          vec(e.center);
          raw(",\"start\":");
          vec(e.a);
          raw(",\"end\":");
          vec(e.b);
          raw("}");
          break;
        case geobool::Segment::Kind::Circle:
          raw("{\"kind\":\"circle\",\"center\":");
          vec(e.center);
          raw(",\"radius\":");
          num(e.radius);
          raw("}");
          break;
      }
    }
    raw("],\"warnings\":[");
    for (std::size_t i = 0; i < sc.warnings.size(); ++i) {
      if (i) raw(",");
      raw(diagnostic_json(sc.warnings[i]));
    }
    raw("]}");
  }

  void outcome(const SolveOutcome& o) {
    raw("{\"status\":\"");
    raw(solve_status_name(o.status));
    raw("\",\"residual_max\":");
    num(o.residual_max);
    raw(",\"iterations\":{\"attempts\":" + std::to_string(o.total_attempts) +
        ",\"outer\":" + std::to_string(o.total_outer_iters) +
        ",\"newton\":" + std::to_string(o.total_newton_iters) + "}");
    raw(",\"stages\":[");
    for (std::size_t i = 0; i < o.node_reports.size(); ++i) {
      if (i) raw(",");
      const StageRecord& r = o.node_reports[i];
      raw("{\"path\":");
      str(r.path);
      raw(",\"solved\":");
      raw(r.solved ? "true" : "false");
      raw(",\"stage\":\"");
      raw(solve_stage_name(r.stage));
      raw("\",\"level\":" + std::to_string(r.level));
      raw(",\"attempts\":" + std::to_string(r.attempts));
      raw(",\"outer_iters\":" + std::to_string(r.outer_iters));
      raw(",\"newton_iters\":" + std::to_string(r.newton_iters));
      raw(",\"residual_max\":");
      num(r.residual_max);
      raw("}");
    }
    raw("]");
    if (o.status != SolveStatus::Solved) {
      raw(",\"failed_path\":");
      str(o.failed_path);
      raw(",\"failed_stage\":\"");
      raw(solve_stage_name(o.failed_stage));
      raw("\"");
    }
    raw("}");
  }
};

}  // namespace

std::string solved_model_json(Model& m, const SolveOutcome& outcome,
                              const geobool::SceneOutput& scene) {
  JsonWriter w(m);
  w.raw("{\"model\":");
  w.structure(m.root());
  w.raw(",\"solve\":");
  w.outcome(outcome);
  w.raw(",\"scene\":");
  w.scene(scene);
  w.raw("}\n");
  return std::move(w.out);
}

}  // namespace aidl
