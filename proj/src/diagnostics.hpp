#pragma once

#include <string>
#include <vector>

namespace aidl {

enum class Severity { Error, Warning, Note };

// 1-based source location; 0 means "unknown / not tied to source text".
struct SourceSpan {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

// Rule codes are a frozen enumeration; new rules append, existing codes never
// change meaning.
//   E0001 SyntaxError          E0007 IllegalReference
//   E0002 NameResolution       E0008 SelfReference
//   E0003 DuplicateName        E0009 DanglingReference
//   E0004 SubtreeViolation     E0010 LoweringError
//   E0005 UnknownConstraint    E0011 IoError
//   E0006 ArityOrType          E0012 InvalidArgument
//   W0001 OpenChain            W0002 HoleIgnored
//   E0013 BooleanDegeneracy
struct Diagnostic {
  std::string code;
  Severity severity = Severity::Error;
  std::string message;
  std::string file;
  SourceSpan span;
  std::string path;  // structure path, e.g. "root.base"
};

inline const char* severity_name(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "error";
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

}  // namespace aidl
