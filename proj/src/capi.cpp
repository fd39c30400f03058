#include "aidl/aidl.h"

#include <new>
#include <string>
#include <vector>

#include "engine.hpp"
#include "jsonout.hpp"

using aidl::Diagnostic;

struct aidl_options {
  aidl::engine::RunConfig cfg;
};

struct aidl_run {
  aidl_status status = AIDL_OK;
  std::vector<std::string> diag_json;
  std::vector<std::string> diag_text;
  std::string model_json;
  std::string svg;
  std::string report_json;
  std::string formatted;
  bool has_model_json = false;
  bool has_svg = false;
  bool has_formatted = false;
};

namespace {

aidl_run* from_result(aidl::engine::RunResult&& res) {
  auto* run = new (std::nothrow) aidl_run;
  if (!run) return nullptr;
  run->status = static_cast<aidl_status>(res.exit_code);
  for (const Diagnostic& d : res.diagnostics) {
    run->diag_json.push_back(aidl::diagnostic_json(d));
    run->diag_text.push_back(aidl::diagnostic_human(d));
  }
  if (!res.model_json.empty()) {
    run->model_json = std::move(res.model_json);
    run->has_model_json = true;
  }
  if (!res.svg.empty()) {
    run->svg = std::move(res.svg);
    run->has_svg = true;
  }
  run->report_json = std::move(res.report_json);
  return run;
}

aidl::engine::RunConfig config_of(const aidl_options* opts) {
  return opts ? opts->cfg : aidl::engine::RunConfig{};
}

aidl_run* argument_error(const char* message) {
  auto* run = new (std::nothrow) aidl_run;
  if (!run) return nullptr;
  run->status = AIDL_ERROR_ARGUMENT;
  Diagnostic d;
  d.code = "E0012";
  d.severity = aidl::Severity::Error;
  d.message = message;
  run->diag_json.push_back(aidl::diagnostic_json(d));
  run->diag_text.push_back(aidl::diagnostic_human(d));
  return run;
}

}  // namespace

extern "C" {

const char* aidl_version(void) { return "0.1.0"; }

aidl_options* aidl_options_new(void) { return new (std::nothrow) aidl_options; }

void aidl_options_free(aidl_options* opts) { delete opts; }

aidl_status aidl_options_set(aidl_options* opts, const char* key, double value) {
  if (!opts || !key) return AIDL_ERROR_ARGUMENT;
  std::string k = key;
  if (value <= 0.0) return AIDL_ERROR_ARGUMENT;
  if (k == "tol_residual") opts->cfg.solver.tol_residual = value;
  else if (k == "max_newton") opts->cfg.solver.max_newton_iters = static_cast<int>(value);
  else if (k == "max_outer") opts->cfg.solver.max_outer_iters = static_cast<int>(value);
  else if (k == "rank_tol") opts->cfg.solver.rank_tol = value;
  else if (k == "chord_tol") opts->cfg.chord_tol = value;
  else if (k == "join_tol") opts->cfg.join_tol = value;
  else return AIDL_ERROR_ARGUMENT;
  return AIDL_OK;
}

aidl_run* aidl_check(const char* name, const char* source, const aidl_options* opts) {
  if (!name || !source) return argument_error("name and source must not be NULL");
  return from_result(aidl::engine::check(name, source, config_of(opts)));
}

aidl_run* aidl_solve(const char* name, const char* source, const aidl_options* opts) {
  if (!name || !source) return argument_error("name and source must not be NULL");
  return from_result(aidl::engine::solve(name, source, config_of(opts)));
}

aidl_run* aidl_render(const char* name, const char* source, const aidl_options* opts) {
  if (!name || !source) return argument_error("name and source must not be NULL");
  return from_result(aidl::engine::render(name, source, config_of(opts)));
}

aidl_run* aidl_render_model_json(const char* name, const char* json,
                                 const aidl_options* opts) {
  if (!name || !json) return argument_error("name and json must not be NULL");
  return from_result(aidl::engine::render_json(name, json, config_of(opts)));
}

aidl_run* aidl_format(const char* name, const char* source, const aidl_options*) {
  if (!name || !source) return argument_error("name and source must not be NULL");
  auto* run = new (std::nothrow) aidl_run;
  if (!run) return nullptr;
  std::vector<Diagnostic> diags;
  std::string text = aidl::engine::format_source(name, source, diags);
  for (const Diagnostic& d : diags) {
    run->diag_json.push_back(aidl::diagnostic_json(d));
    run->diag_text.push_back(aidl::diagnostic_human(d));
  }
  if (aidl::has_errors(diags)) {
    run->status = AIDL_ERROR_VALIDATION;
  } else {
    run->formatted = std::move(text);
    run->has_formatted = true;
  }
  return run;
}

void aidl_run_free(aidl_run* run) { delete run; }

aidl_status aidl_run_status(const aidl_run* run) {
  return run ? run->status : AIDL_ERROR_ARGUMENT;
}

size_t aidl_run_diagnostic_count(const aidl_run* run) {
  return run ? run->diag_json.size() : 0;
}

const char* aidl_run_diagnostic_json(const aidl_run* run, size_t index) {
  if (!run || index >= run->diag_json.size()) return nullptr;
  return run->diag_json[index].c_str();
}

const char* aidl_run_diagnostic_text(const aidl_run* run, size_t index) {
  if (!run || index >= run->diag_text.size()) return nullptr;
  return run->diag_text[index].c_str();
}

const char* aidl_run_model_json(const aidl_run* run) {
  return run && run->has_model_json ? run->model_json.c_str() : nullptr;
}

const char* aidl_run_svg(const aidl_run* run) {
  return run && run->has_svg ? run->svg.c_str() : nullptr;
}

const char* aidl_run_report_json(const aidl_run* run) {
  return run && !run->report_json.empty() ? run->report_json.c_str() : nullptr;
}

const char* aidl_run_formatted(const aidl_run* run) {
  return run && run->has_formatted ? run->formatted.c_str() : nullptr;
}

}  // extern "C"
