#pragma once

#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace aidl {

struct ConstraintDef {
  std::string canonical;
  std::vector<std::string> synonyms;
  bool structural = false;
  // Allowed argument shapes; atoms: point, line, arc, circle, curve,
  // circlelike, structure, scalar, param, measure, entity.
  std::vector<std::vector<std::string>> signatures;
};

// Constraint vocabulary loaded from the embedded registry data file
// (data/constraint_registry.json).
class Registry {
 public:
  static const Registry& instance();

  const ConstraintDef* find(const std::string& canonical) const;
  // canonical-or-synonym lookup
  std::optional<std::string> resolve(const std::string& surface) const;
  // suggestion for an unknown name: known-misuse hints first, then nearest
  // registered name by edit distance (ties alphabetical)
  std::string suggest(const std::string& surface) const;
  const std::vector<ConstraintDef>& all() const { return defs_; }

 private:
  Registry();
  std::vector<ConstraintDef> defs_;
  std::vector<std::pair<std::string, std::string>> hints_;
};

struct SynonymResolution {
  bool found = false;
  std::string canonical;   // when found
  std::string suggestion;  // when not found
};
SynonymResolution resolve_synonym(const std::string& surface);

int edit_distance(const std::string& a, const std::string& b);

// Empty string when the spec's arguments match one of the registered
// signatures; a human-readable mismatch description otherwise.
std::string check_signature(const Model& model, const ConstraintSpec& spec);

// lhs <= rhs as equalities with a fresh slack: {lhs - rhs + s, s - |s|}.
// The slack starts at the feasibility gap max(0, rhs - lhs) at current values.
LoweredConstraint rewrite_inequality(Model& m, StructureId owner, ExprId lhs, ExprId rhs);

// width >= 0 and height >= 0 for one bounding box instance.
std::vector<LoweredConstraint> add_noninversion(Model& m, const BBoxInstance& box);

// Lowers one declared constraint at current (initialization) values; throws
// ModelError on unresolvable deferred forms.
LoweredConstraint lower(Model& m, StructureId owner, std::uint32_t spec_index);

// Lowers every constraint in the tree, attaches implicit arc residuals and
// per-bounding-box non-inversion constraints. Errors are returned as
// diagnostics, never thrown.
std::vector<Diagnostic> finalize_deferred(Model& m);

}  // namespace aidl
