#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace aidl {

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::Inconsistent: return "inconsistent";
    case SolveStatus::DidNotConverge: return "did_not_converge";
  }
  return "?";
}

const char* solve_stage_name(SolveStage s) {
  switch (s) {
    case SolveStage::Local: return "local";
    case SolveStage::Translation: return "translation";
    case SolveStage::Geometric: return "geometric";
  }
  return "?";
}

double max_abs_residual(const Model& m, std::span<const ExprId> residuals) {
  double worst = 0.0;
  Evaluator ev(m.pool(), m.values());
  for (ExprId r : residuals) {
    try {
      double v = ev.eval(r);
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::fabs(v));
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

namespace {

bool eval_all(const Model& m, std::span<const ExprId> exprs, Eigen::VectorXd& out) {
  Evaluator ev(m.pool(), m.values());
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    try {
      double v = ev.eval(exprs[i]);
      if (!std::isfinite(v)) return false;
      out[static_cast<Eigen::Index>(i)] = v;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

}  // namespace

NewtonResult newton_solve(Model& m, const ConstraintSystem& sys, const NewtonConfig& cfg) {
  NewtonResult res;
  const std::size_t nr = sys.residuals.size();
  const std::size_t np = sys.free.size();

  Eigen::VectorXd r(static_cast<Eigen::Index>(nr));
  if (!eval_all(m, sys.residuals, r)) {
    // not evaluable at the starting point; unrecoverable for this attempt
    res.residual_max = std::numeric_limits<double>::infinity();
    return res;
  }
  res.residual_max = nr ? r.cwiseAbs().maxCoeff() : 0.0;
  if (res.residual_max <= cfg.tol_residual) {
    res.converged = true;
    return res;
  }
  if (np == 0) {
    res.stalled = true;
    return res;
  }

  // The Jacobian is symbolic and exact on the pinned system.
  std::vector<ExprId> jac(nr * np);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < np; ++j)
      jac[i * np + j] = differentiate(m.pool(), sys.residuals[i], sys.free[j]);

  Eigen::MatrixXd J(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(np));
  Eigen::VectorXd rtry(static_cast<Eigen::Index>(nr));

  for (res.iterations = 0; res.iterations < cfg.max_newton_iters; ++res.iterations) {
    // evaluate Jacobian entries
    {
      Evaluator ev(m.pool(), m.values());
      bool ok = true;
      for (std::size_t i = 0; i < nr && ok; ++i)
        for (std::size_t j = 0; j < np && ok; ++j) {
          try {
            double v = ev.eval(jac[i * np + j]);
            if (!std::isfinite(v)) ok = false;
            J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
          } catch (const DomainError&) {
            ok = false;
          }
        }
      if (!ok) return res;  // Jacobian not evaluable; give up this attempt
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::VectorXd y = svd.matrixU().transpose() * (-r);
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      y[k] = sv[k] < cfg.rank_tol ? 0.0 : y[k] / sv[k];
    Eigen::VectorXd delta = svd.matrixV() * y;

    if (!delta.allFinite()) return res;

    double xnorm = 0.0;
    for (std::size_t j = 0; j < np; ++j) xnorm += m.value(sys.free[j]) * m.value(sys.free[j]);
    if (delta.norm() <= 1e-14 * (1.0 + std::sqrt(xnorm))) {
      res.stalled = true;  // least-squares optimum with residual above tolerance
      return res;
    }

    std::vector<double> saved(np);
    for (std::size_t j = 0; j < np; ++j) saved[j] = m.value(sys.free[j]);

    double rnorm = r.norm();
    double t = 1.0;
    bool accepted = false;
    bool domain_blocked = true;
    for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
      for (std::size_t j = 0; j < np; ++j)
        m.set_value(sys.free[j], saved[j] + t * delta[static_cast<Eigen::Index>(j)]);
      if (!eval_all(m, sys.residuals, rtry)) continue;  // failed step: halve and retry
      domain_blocked = false;
      if (rtry.norm() < rnorm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      for (std::size_t j = 0; j < np; ++j) m.set_value(sys.free[j], saved[j]);
      res.stalled = !domain_blocked;
      return res;
    }
    r = rtry;
    res.residual_max = r.cwiseAbs().maxCoeff();
    if (res.residual_max <= cfg.tol_residual) {
      res.converged = true;
      ++res.iterations;
      return res;
    }
  }
  return res;  // out of iterations
}

IterationReport iterated_solve(Model& m, const ConstraintSystem& sys,
                               const NewtonConfig& cfg) {
  IterationReport rep;
  auto piecewise = collect_piecewise(m.pool(), sys.residuals);

  std::vector<PinPattern> attempted;
  std::vector<ExprId> last_pinned;
  PinPattern prev_pattern;
  bool have_prev = false;
  bool last_newton_failed = false;
  bool last_newton_stalled = false;
  double best = std::numeric_limits<double>::infinity();
  bool improved_last = true;

  auto is_attempted = [&](const PinPattern& p) {
    return std::find(attempted.begin(), attempted.end(), p) != attempted.end();
  };

  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    PinPattern pattern = choose_branches(m.pool(), piecewise, m.values());
    if (is_attempted(pattern)) {
      if (last_newton_failed) {
        // Failure escape: flip one branch to an untried pattern whose pinned
        // system actually differs.
        bool found = false;
        for (std::size_t k = 0; k < pattern.nodes.size() && !found; ++k) {
          PinPattern cand = pattern;
          cand.choice[k] ^= 1;
          if (is_attempted(cand)) continue;
          auto pinned = apply_pins(m.pool(), sys.residuals, cand);
          if (pinned == last_pinned) continue;
          pattern = std::move(cand);
          found = true;
        }
        if (!found) {
          rep.status = last_newton_stalled ? SolveStatus::Inconsistent
                                           : SolveStatus::DidNotConverge;
          return rep;
        }
      } else if (have_prev && pattern == prev_pattern) {
        // Newton satisfied the pinned system, the originals are violated and
        // pinning reached a fixed point.
        rep.status = SolveStatus::Inconsistent;
        return rep;
      } else if (!improved_last) {
        rep.status = SolveStatus::DidNotConverge;  // cycle without improvement
        return rep;
      }
    }
    if (!is_attempted(pattern)) attempted.push_back(pattern);

    auto pinned = apply_pins(m.pool(), sys.residuals, pattern);
    last_pinned = pinned;
    prev_pattern = pattern;
    have_prev = true;

    ConstraintSystem ps;
    ps.free = sys.free;
    ps.residuals = std::move(pinned);
    NewtonResult nr = newton_solve(m, ps, cfg);
    ++rep.outer_iters;
    rep.newton_iters += nr.iterations;
    last_newton_failed = !nr.converged;
    last_newton_stalled = nr.stalled;

    double orig = max_abs_residual(m, sys.residuals);
    rep.residual_max = orig;
    improved_last = orig < best - 1e-15;
    best = std::min(best, orig);
    if (orig <= cfg.tol_residual) {
      rep.solved = true;
      rep.status = SolveStatus::Solved;
      return rep;
    }
    if (piecewise.empty() && last_newton_failed) {
      // nothing to re-pin; the smooth system itself cannot be satisfied
      rep.status = last_newton_stalled ? SolveStatus::Inconsistent
                                       : SolveStatus::DidNotConverge;
      return rep;
    }
  }
  rep.status = SolveStatus::DidNotConverge;
  return rep;
}

std::vector<ExprId> subtree_residuals(const Model& m, StructureId root) {
  std::vector<ExprId> out;
  std::vector<StructureId> work{root};
  while (!work.empty()) {
    StructureId s = work.back();
    work.pop_back();
    for (const LoweredConstraint& lc : m.structure(s).lowered)
      for (ExprId r : lc.residuals) out.push_back(r);
    const auto& ch = m.structure(s).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) work.push_back(*it);
  }
  return out;
}

namespace {

struct NodeSolver {
  Model& m;
  const NewtonConfig& cfg;
  SolveOutcome& out;

  std::vector<ParamId> local_params(StructureId s) {
    std::vector<ParamId> ps;
    for (ParamId p = 0; p < m.param_count(); ++p) {
      const ParamMeta& meta = m.param_meta(p);
      if (meta.owner != s || !meta.is_mutable) continue;
      if (meta.role == ParamRole::FrameTx || meta.role == ParamRole::FrameTy) continue;
      ps.push_back(p);
    }
    return ps;
  }

  ConstraintSystem build_system(StructureId s, SolveStage stage, int level) {
    ConstraintSystem sys;
    sys.free = local_params(s);
    int constraint_depth = 0;
    if (stage == SolveStage::Translation) {
      for (int d = 1; d <= level; ++d)
        for (StructureId t : m.descendants_at_depth(s, d)) {
          const Frame& f = m.structure(t).frame;
          if (f.tx != kNoId) {
            sys.free.push_back(f.tx);
            sys.free.push_back(f.ty);
          }
        }
      constraint_depth = level - 1;
    } else if (stage == SolveStage::Geometric) {
      for (int d = 1; d <= level; ++d)
        for (StructureId t : m.descendants_at_depth(s, d))
          for (ParamId p = 0; p < m.param_count(); ++p) {
            const ParamMeta& meta = m.param_meta(p);
            if (meta.owner == t && meta.is_mutable) sys.free.push_back(p);
          }
      constraint_depth = level;
    }
    std::sort(sys.free.begin(), sys.free.end());
    sys.free.erase(std::unique(sys.free.begin(), sys.free.end()), sys.free.end());

    for (int d = 0; d <= constraint_depth; ++d)
      for (StructureId t : m.descendants_at_depth(s, d))
        for (const LoweredConstraint& lc : m.structure(t).lowered)
          for (ExprId r : lc.residuals) sys.residuals.push_back(r);
    return sys;
  }

  bool solve_node(StructureId s) {
    for (StructureId c : m.structure(s).children)
      if (!solve_node(c)) return false;

    int depth = m.subtree_depth(s);
    StageRecord rec;
    rec.node = s;
    rec.path = m.path_of(s);

    IterationReport rep;
    auto attempt = [&](SolveStage stage, int level) {
      ConstraintSystem sys = build_system(s, stage, level);
      std::vector<double> saved(sys.free.size());
      for (std::size_t i = 0; i < sys.free.size(); ++i) saved[i] = m.value(sys.free[i]);
      rep = iterated_solve(m, sys, cfg);
      ++rec.attempts;
      ++out.total_attempts;
      // the record reflects the last attempt; totals aggregate everything
      rec.outer_iters = rep.outer_iters;
      rec.newton_iters = rep.newton_iters;
      out.total_outer_iters += rep.outer_iters;
      out.total_newton_iters += rep.newton_iters;
      rec.stage = stage;
      rec.level = level;
      rec.residual_max = rep.residual_max;
      if (rep.solved) return true;
      // roll back so every attempt starts from the previously solved state
      for (std::size_t i = 0; i < sys.free.size(); ++i) m.set_value(sys.free[i], saved[i]);
      return false;
    };

    bool solved = attempt(SolveStage::Local, 0);
    if (!solved)
      for (int l = 1; l <= depth && !solved; ++l) solved = attempt(SolveStage::Translation, l);
    if (!solved)
      for (int l = 1; l <= depth && !solved; ++l) solved = attempt(SolveStage::Geometric, l);

    rec.solved = solved;
    out.node_reports.push_back(rec);
    if (!solved) {
      out.status = rep.status;
      out.failed_path = rec.path;
      out.failed_stage = rec.stage;
    }
    return solved;
  }
};

}  // namespace

SolveOutcome solve_model(Model& m, const NewtonConfig& cfg) {
  SolveOutcome out;
  if (m.root() == kNoId) {
    out.status = SolveStatus::Solved;
    return out;
  }
  NodeSolver ns{m, cfg, out};
  bool ok = ns.solve_node(m.root());
  auto all = subtree_residuals(m, m.root());
  out.residual_max = max_abs_residual(m, all);
  if (ok) {
    out.status = out.residual_max <= cfg.tol_residual ? SolveStatus::Solved
                                                      : SolveStatus::Inconsistent;
  }
  return out;
}

}  // namespace aidl
