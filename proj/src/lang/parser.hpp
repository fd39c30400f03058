#pragma once

#include <string>
#include <vector>

#include "../diagnostics.hpp"
#include "ast.hpp"

namespace aidl::lang {

struct ParseResult {
  AstUnit unit;  // root is null when parsing failed outright
  std::vector<Diagnostic> diagnostics;
};

// Parses one source unit. Recovery continues after statement boundaries so a
// single run can report several errors.
ParseResult parse(const std::string& text, const std::string& file);

}  // namespace aidl::lang
