#pragma once

#include <span>
#include <string>
#include <vector>

#include "model.hpp"

namespace aidl {

struct NewtonConfig {
  double tol_residual = 1e-9;
  int max_newton_iters = 50;
  int max_outer_iters = 10;   // branch re-pin loop
  int max_halvings = 16;      // step damping
  double rank_tol = 1e-10;    // singular values below this are discarded
};

enum class SolveStatus : std::uint8_t { Solved, Inconsistent, DidNotConverge };
const char* solve_status_name(SolveStatus s);

enum class SolveStage : std::uint8_t { Local, Translation, Geometric };
const char* solve_stage_name(SolveStage s);

// Free parameters plus residuals; everything not listed in `free` is treated
// as a constant at its current value.
struct ConstraintSystem {
  std::vector<ParamId> free;      // ascending
  std::vector<ExprId> residuals;  // original forms, may contain min/max/abs
};

struct NewtonResult {
  bool converged = false;
  bool stalled = false;  // least-squares optimum reached with residual > tol
  int iterations = 0;
  double residual_max = 0.0;  // on the given (pinned) system at exit
};

struct IterationReport {
  bool solved = false;
  SolveStatus status = SolveStatus::DidNotConverge;
  int outer_iters = 0;
  int newton_iters = 0;
  double residual_max = 0.0;  // original residuals at exit
};

struct StageRecord {
  StructureId node = kNoId;
  std::string path;
  bool solved = false;
  SolveStage stage = SolveStage::Local;
  int level = 0;
  int attempts = 0;
  int outer_iters = 0;
  int newton_iters = 0;
  double residual_max = 0.0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::DidNotConverge;
  std::vector<StageRecord> node_reports;  // post-order
  double residual_max = 0.0;              // all original residuals after solving
  int total_attempts = 0;
  int total_outer_iters = 0;
  int total_newton_iters = 0;
  std::string failed_path;
  SolveStage failed_stage = SolveStage::Local;
};

// Damped Newton on a branch-free system. Non-square or rank-deficient
// Jacobians are solved in the minimum-norm least-squares sense. Parameter
// values are left at the last accepted point.
NewtonResult newton_solve(Model& m, const ConstraintSystem& pinned, const NewtonConfig& cfg);

// Pin branches at current values, solve, re-check the original residuals and
// re-pin until they hold. A failed Newton run on an already-attempted pin
// pattern retries the nearest untried single-branch flip before giving up.
IterationReport iterated_solve(Model& m, const ConstraintSystem& system,
                               const NewtonConfig& cfg);

// Post-order hierarchical solve with two-stage iterative deepening.
SolveOutcome solve_model(Model& m, const NewtonConfig& cfg);

// All residuals lowered in the subtree (user, implicit, non-inversion).
std::vector<ExprId> subtree_residuals(const Model& m, StructureId root);

// +inf when a residual is not evaluable (domain error).
double max_abs_residual(const Model& m, std::span<const ExprId> residuals);

}  // namespace aidl
