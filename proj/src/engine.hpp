#pragma once

#include <memory>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "geobool.hpp"
#include "model.hpp"
#include "solver.hpp"

namespace aidl::engine {

struct RunConfig {
  NewtonConfig solver;
  double chord_tol = 1e-3;
  double join_tol = 1e-6;
};

// Exit codes are a frozen contract:
//   0 success, 1 validation error, 2 I/O error, 3 solve failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitSolve = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::vector<Diagnostic> diagnostics;
  bool solved = false;
  SolveStatus status = SolveStatus::DidNotConverge;
  SolveOutcome outcome;
  std::string model_json;   // solve / render after a successful solve
  std::string svg;          // render
  std::string report_json;  // one-line machine summary
  std::unique_ptr<Model> model;  // populated by check/solve for callers that inspect it
};

RunResult check(const std::string& file, const std::string& text, const RunConfig& cfg);
RunResult solve(const std::string& file, const std::string& text, const RunConfig& cfg);
RunResult render(const std::string& file, const std::string& text, const RunConfig& cfg);
// Renders straight from a solved-model JSON document.
RunResult render_json(const std::string& file, const std::string& json_text,
                      const RunConfig& cfg);

// Canonical reformat; diagnostics on parse/elaborate failure.
std::string format_source(const std::string& file, const std::string& text,
                          std::vector<Diagnostic>& diagnostics);

}  // namespace aidl::engine
