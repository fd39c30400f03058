#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "../constraint_spec.hpp"
#include "../diagnostics.hpp"

namespace aidl::lang {

struct AstExpr {
  enum class Kind : std::uint8_t {
    Number,  // literal (deg suffix already converted to radians)
    Path,    // dotted reference
    Call,    // named function: sin(x), min(a, b), ...
    Neg,     // unary minus
    Binary,  // + - * /
    Cmp,     // == <= >=
    And,     // &&
    Tuple,   // (x, y) -- constructor arguments only
  };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::vector<std::string> path;
  std::string call;
  std::vector<AstExpr> items;  // Call args / Tuple elements
  char op = 0;                 // Binary: '+', '-', '*', '/'
  CmpOp cmp = CmpOp::Eq;
  std::unique_ptr<AstExpr> a, b;
  SourceSpan span;
};

struct AstNamedArg {
  std::string name;
  AstExpr value;
  SourceSpan span;
};

struct AstParamDecl {
  std::string name;
  AstExpr init;
  bool fixed = false;
  SourceSpan span;
};

struct AstGeoDecl {
  std::string keyword;  // point | line | arc | circle | rect | triangle
  std::string name;
  std::string ctor;     // Point | Line | Arc | Circle | Rectangle | Triangle
  std::vector<AstNamedArg> args;
  SourceSpan span;
};

struct AstConstrain {
  bool is_call = false;
  std::string name;            // surface constraint name when is_call
  std::vector<AstExpr> args;   // call arguments
  std::unique_ptr<AstExpr> equation;  // logical expression otherwise
  SourceSpan span;
};

struct AstStructure;

struct AstStmt {
  enum class Kind : std::uint8_t { Param, Geo, Constrain, Structure } kind;
  std::unique_ptr<AstParamDecl> param;
  std::unique_ptr<AstGeoDecl> geo;
  std::unique_ptr<AstConstrain> constrain;
  std::unique_ptr<AstStructure> structure;
};

struct AstStructure {
  std::string name;
  std::string type;         // validated during elaboration
  std::string orientation;  // empty = Top
  bool has_at = false;
  AstExpr at_x, at_y;
  std::vector<AstStmt> body;
  SourceSpan span;
};

struct AstUnit {
  std::unique_ptr<AstStructure> root;
};

}  // namespace aidl::lang
