#pragma once

#include <string>

#include "diagnostics.hpp"
#include "geobool.hpp"
#include "model.hpp"
#include "solver.hpp"

namespace aidl {

std::string json_escape(const std::string& s);

// One line-delimited machine-readable record per diagnostic.
std::string diagnostic_json(const Diagnostic& d);
std::string diagnostic_human(const Diagnostic& d);

// Full solved-model document: structure tree, solve outcome, scene.
std::string solved_model_json(Model& m, const SolveOutcome& outcome,
                              const geobool::SceneOutput& scene);

}  // namespace aidl
