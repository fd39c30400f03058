#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace aidl {

using ParamId = std::uint32_t;
using ExprId = std::uint32_t;
inline constexpr std::uint32_t kNoId = 0xffffffffu;

enum class UnaryOp : std::uint8_t {
  Neg, Sin, Cos, Arcsin, Arccos, Sqrt, Abs, Norm, Square,
};

enum class BinaryOp : std::uint8_t {
  Sub, Add, Mul, Div, Min, Max,
};

const char* unary_op_name(UnaryOp op);
const char* binary_op_name(BinaryOp op);

// norm is an alias of abs in this scalar expression language; both are
// piecewise and subject to branch pinning.
inline bool is_piecewise(UnaryOp op) { return op == UnaryOp::Abs || op == UnaryOp::Norm; }
inline bool is_piecewise(BinaryOp op) { return op == BinaryOp::Min || op == BinaryOp::Max; }

// Raised when evaluation leaves an operator's domain (sqrt of a negative,
// arcsin/arccos outside [-1,1], division by a near-zero value). The solver
// treats it as a failed Newton step.
struct DomainError {
  const char* op;
  double value;
};

// Raised by differentiate() when the expression still contains a piecewise
// operator; callers must pin branches first.
struct BranchyExpression {
  ExprId node;
};

inline constexpr double kDivTolerance = 1e-12;

enum class ExprKind : std::uint8_t { Const, Param, Unary, Binary };

struct ExprNode {
  ExprKind kind;
  std::uint8_t op = 0;       // UnaryOp or BinaryOp
  ExprId a = kNoId;          // child / left
  ExprId b = kNoId;          // right
  double value = 0.0;        // Const payload
  ParamId param = kNoId;     // Param payload
};

// Hash-consed expression arena. Structurally identical expressions share one
// id, so structural equality is id equality and shared subexpressions are
// evaluated once per pass. Nodes are immutable once created.
class ExprPool {
 public:
  ExprId constant(double v);
  ExprId param(ParamId p);
  ExprId unary(UnaryOp op, ExprId a);
  ExprId binary(BinaryOp op, ExprId a, ExprId b);

  // Conveniences used heavily by constraint lowering.
  ExprId add(ExprId a, ExprId b) { return binary(BinaryOp::Add, a, b); }
  ExprId sub(ExprId a, ExprId b) { return binary(BinaryOp::Sub, a, b); }
  ExprId mul(ExprId a, ExprId b) { return binary(BinaryOp::Mul, a, b); }
  ExprId div(ExprId a, ExprId b) { return binary(BinaryOp::Div, a, b); }
  ExprId neg(ExprId a) { return unary(UnaryOp::Neg, a); }
  ExprId square(ExprId a) { return unary(UnaryOp::Square, a); }

  const ExprNode& node(ExprId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  ExprId intern(const ExprNode& n);

  std::vector<ExprNode> nodes_;
  std::unordered_map<std::uint64_t, std::vector<ExprId>> buckets_;
};

double eval_unary(UnaryOp op, double x);            // throws DomainError
double eval_binary(BinaryOp op, double l, double r);  // throws DomainError

// Memoizing evaluator against a parameter value table indexed by ParamId.
// Reuse one instance across many eval calls with the same environment; call
// invalidate() whenever parameter values change.
class Evaluator {
 public:
  Evaluator(const ExprPool& pool, std::span<const double> values)
      : pool_(&pool), values_(values) {}

  void invalidate() { ++stamp_; }
  void rebind(std::span<const double> values) { values_ = values; ++stamp_; }

  double eval(ExprId id);

 private:
  const ExprPool* pool_;
  std::span<const double> values_;
  std::vector<double> memo_;
  std::vector<std::uint32_t> seen_;
  std::uint32_t stamp_ = 1;
};

// One-shot evaluation.
double eval(const ExprPool& pool, ExprId id, std::span<const double> values);

// Symbolic partial derivative with respect to one parameter. The input must
// be branch-free; see pin_branches. Derivatives of parameters absent from the
// expression fold to Const 0.
ExprId differentiate(ExprPool& pool, ExprId id, ParamId wrt);

// --- Branch pinning -------------------------------------------------------
//
// A pin pattern assigns every piecewise node reachable from a set of roots a
// concrete branch: for min/max 0 = left operand, 1 = right; for abs/norm
// 0 = positive branch (operand itself), 1 = negated operand. Evaluation ties
// pin to the first operand / positive branch.

struct PinPattern {
  std::vector<ExprId> nodes;         // piecewise nodes, deterministic order
  std::vector<std::uint8_t> choice;  // parallel to nodes

  bool operator==(const PinPattern& o) const {
    return nodes == o.nodes && choice == o.choice;
  }
};

// Collects piecewise nodes reachable from `roots` in a deterministic
// (DFS, left-to-right, dedup) order.
std::vector<ExprId> collect_piecewise(const ExprPool& pool, std::span<const ExprId> roots);

// Chooses the currently active branch of every piecewise node under `values`.
PinPattern choose_branches(const ExprPool& pool, std::span<const ExprId> piecewise,
                           std::span<const double> values);

// Rewrites `roots` replacing each piecewise node by the branch selected in
// `pattern`. Nodes not listed keep evaluation-directed behavior unavailable —
// every reachable piecewise node must appear in the pattern.
std::vector<ExprId> apply_pins(ExprPool& pool, std::span<const ExprId> roots,
                               const PinPattern& pattern);

// Single-expression convenience matching the operation contract: the result
// evaluates to exactly the same double as the input under `values` and is a
// fixed point of further pinning.
ExprId pin_branches(ExprPool& pool, ExprId id, std::span<const double> values);

// Prefix S-expression form, e.g. "(mul 2 (param \"width\"))". param_name maps
// a ParamId to the quoted name.
std::string to_sexpr(const ExprPool& pool, ExprId id,
                     const std::function<std::string(ParamId)>& param_name);

}  // namespace aidl
