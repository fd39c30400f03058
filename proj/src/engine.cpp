#include "engine.hpp"

#include <json.hpp>

#include "constraints.hpp"
#include "jsonout.hpp"
#include "lang/elaborate.hpp"
#include "lang/format.hpp"
#include "lang/parser.hpp"
#include "numfmt.hpp"
#include "svgout.hpp"

namespace aidl::engine {

namespace {

std::string report_json(const std::string& file, const char* command,
                        const std::string& status, int exit_code,
                        const SolveOutcome* outcome) {
  std::string out = "{\"file\":\"" + json_escape(file) + "\",\"command\":\"" + command +
                    "\",\"status\":\"" + status +
                    "\",\"exit_code\":" + std::to_string(exit_code);
  if (outcome) {
    out += ",\"residual_max\":" + fmt_double(outcome->residual_max);
    out += ",\"iterations\":{\"attempts\":" + std::to_string(outcome->total_attempts) +
           ",\"outer\":" + std::to_string(outcome->total_outer_iters) +
           ",\"newton\":" + std::to_string(outcome->total_newton_iters) + "}";
    out += ",\"stages\":[";
    for (std::size_t i = 0; i < outcome->node_reports.size(); ++i) {
      if (i) out += ",";
      const StageRecord& r = outcome->node_reports[i];
      out += "{\"path\":\"" + json_escape(r.path) + "\",\"stage\":\"" +
             solve_stage_name(r.stage) + "\",\"level\":" + std::to_string(r.level) +
             ",\"solved\":" + (r.solved ? "true" : "false") + "}";
    }
    out += "]";
    if (outcome->status != SolveStatus::Solved) {
      out += ",\"failed_path\":\"" + json_escape(outcome->failed_path) + "\"";
      out += ",\"failed_stage\":\"";
      out += solve_stage_name(outcome->failed_stage);
      out += "\"";
    }
  }
  out += "}";
  return out;
}

// parse + elaborate + validate + finalize_deferred; no solving
RunResult front_half(const std::string& file, const std::string& text, const RunConfig&) {
  RunResult res;
  lang::ParseResult parsed = lang::parse(text, file);
  res.diagnostics = std::move(parsed.diagnostics);
  if (!parsed.unit.root || has_errors(res.diagnostics)) {
    res.exit_code = kExitValidation;
    return res;
  }
  lang::ElaborateResult el = lang::elaborate(parsed.unit, file);
  for (auto& d : el.diagnostics) res.diagnostics.push_back(std::move(d));
  res.model = std::move(el.model);
  if (has_errors(res.diagnostics)) {
    res.exit_code = kExitValidation;
    return res;
  }
  auto fd = finalize_deferred(*res.model);
  for (auto& d : fd) {
    d.file = file;
    res.diagnostics.push_back(std::move(d));
  }
  if (has_errors(res.diagnostics)) res.exit_code = kExitValidation;
  return res;
}

}  // namespace

RunResult check(const std::string& file, const std::string& text, const RunConfig& cfg) {
  RunResult res = front_half(file, text, cfg);
  res.report_json = report_json(file, "check",
                                res.exit_code == kExitOk ? "ok" : "validation_error",
                                res.exit_code, nullptr);
  return res;
}

RunResult solve(const std::string& file, const std::string& text, const RunConfig& cfg) {
  RunResult res = front_half(file, text, cfg);
  if (res.exit_code != kExitOk) {
    res.report_json = report_json(file, "solve", "validation_error", res.exit_code, nullptr);
    return res;
  }
  res.outcome = solve_model(*res.model, cfg.solver);
  res.status = res.outcome.status;
  res.solved = res.outcome.status == SolveStatus::Solved;
  if (!res.solved) {
    res.exit_code = kExitSolve;
    res.report_json = report_json(file, "solve", solve_status_name(res.outcome.status),
                                  res.exit_code, &res.outcome);
    return res;
  }
  geobool::GeoboolConfig gcfg{cfg.chord_tol, cfg.join_tol};
  geobool::SceneOutput scene = geobool::build_scene(*res.model, gcfg);
  for (auto& d : scene.warnings) {
    Diagnostic copy = d;
    copy.file = file;
    res.diagnostics.push_back(std::move(copy));
  }
  if (has_errors(res.diagnostics)) res.exit_code = kExitValidation;
  res.model_json = solved_model_json(*res.model, res.outcome, scene);
  res.report_json = report_json(file, "solve", solve_status_name(res.outcome.status),
                                res.exit_code, &res.outcome);
  return res;
}

RunResult render(const std::string& file, const std::string& text, const RunConfig& cfg) {
  RunResult res = solve(file, text, cfg);
  if (!res.solved) {
    res.report_json = report_json(file, "render", solve_status_name(res.status),
                                  res.exit_code, nullptr);
    return res;
  }
  geobool::GeoboolConfig gcfg{cfg.chord_tol, cfg.join_tol};
  geobool::SceneOutput scene = geobool::build_scene(*res.model, gcfg);
  res.svg = render_svg(scene, cfg.chord_tol);
  res.report_json = report_json(file, "render", "solved", res.exit_code, &res.outcome);
  return res;
}

RunResult render_json(const std::string& file, const std::string& json_text,
                      const RunConfig& cfg) {
  RunResult res;
  geobool::SceneOutput scene;
  try {
    auto doc = nlohmann::json::parse(json_text);
    const auto& sc = doc.at("scene");
    for (const auto& jf : sc.at("faces")) {
      geobool::Face f;
      f.provenance = jf.value("provenance", "");
      for (const auto& p : jf.at("outer"))
        f.outer.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      for (const auto& jh : jf.at("holes")) {
        geobool::Ring hole;
        for (const auto& p : jh)
          hole.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        f.holes.push_back(std::move(hole));
      }
      scene.faces.push_back(std::move(f));
    }
    for (const auto& je : sc.at("drawing_edges")) {
      geobool::Segment seg;
      std::string kind = je.at("kind").get<std::string>();
      auto vec = [&](const char* k) {
        return geobool::Vec2{je.at(k).at(0).get<double>(), je.at(k).at(1).get<double>()};
      };
      if (kind == "line") {
        seg.kind = geobool::Segment::Kind::Line;
        seg.a = vec("start");
        seg.b = vec("end");
      } else if (kind == "arc") {
        seg.kind = geobool::Segment::Kind::Arc;
        seg.center = vec("center");
        seg.a = vec("start");
        seg.b = vec("end");
      } else {
        seg.kind = geobool::Segment::Kind::Circle;
        seg.center = vec("center");
        seg.radius = je.at("radius").get<double>();
      }
      scene.drawing_edges.push_back(seg);
    }
  } catch (const std::exception& e) {
    Diagnostic d;
    d.code = "E0012";
    d.severity = Severity::Error;
    d.message = std::string("not a solved-model JSON document: ") + e.what();
    d.file = file;
    res.diagnostics.push_back(std::move(d));
    res.exit_code = kExitValidation;
    res.report_json = report_json(file, "render", "validation_error", res.exit_code, nullptr);
    return res;
  }
  res.solved = true;
  res.status = SolveStatus::Solved;
  res.svg = render_svg(scene, cfg.chord_tol);
  res.report_json = report_json(file, "render", "solved", res.exit_code, nullptr);
  return res;
}

std::string format_source(const std::string& file, const std::string& text,
                          std::vector<Diagnostic>& diagnostics) {
  lang::ParseResult parsed = lang::parse(text, file);
  for (auto& d : parsed.diagnostics) diagnostics.push_back(std::move(d));
  if (!parsed.unit.root || has_errors(diagnostics)) return "";
  lang::ElaborateResult el = lang::elaborate(parsed.unit, file);
  for (auto& d : el.diagnostics) diagnostics.push_back(std::move(d));
  if (has_errors(diagnostics)) return "";
  return lang::format(*el.model);
}

}  // namespace aidl::engine
