#pragma once

#include <memory>
#include <string>
#include <vector>

#include "../model.hpp"
#include "ast.hpp"

namespace aidl::lang {

struct ElaborateResult {
  std::unique_ptr<Model> model;  // always built; usable only without error diagnostics
  std::vector<Diagnostic> diagnostics;
};

// Builds the structure tree from a parsed unit, resolves references and
// constraint vocabulary, then validates. All failures are diagnostics.
ElaborateResult elaborate(const AstUnit& unit, const std::string& file);

}  // namespace aidl::lang
