#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "expr.hpp"

namespace aidl::testing {

// Random expression generator for derivative and pinning properties. Keeps
// every intermediate away from operator domain boundaries so central finite
// differences stay well conditioned.
struct ExprGen {
  ExprPool& pool;
  std::vector<ParamId> params;
  std::vector<double>& values;  // indexed by ParamId
  std::mt19937 rng;
  bool allow_piecewise = false;

  ExprGen(ExprPool& p, std::vector<ParamId> ps, std::vector<double>& vals,
          std::uint32_t seed, bool piecewise = false)
      : pool(p), params(std::move(ps)), values(vals), rng(seed), allow_piecewise(piecewise) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  double eval_of(ExprId e) { return eval(pool, e, values); }

  ExprId leaf() {
    if (!params.empty() && pick(3) != 0) return pool.param(params[static_cast<std::size_t>(pick(static_cast<int>(params.size())))]);
    return pool.constant(uniform(-10.0, 10.0));
  }

  bool acceptable(ExprId e, double* out) {
    try {
      double v = eval_of(e);
      if (!std::isfinite(v) || std::fabs(v) > 1e3) return false;
      *out = v;
      return true;
    } catch (const DomainError&) {
      return false;
    }
  }

  ExprId gen(int depth) {
    if (depth <= 0 || pick(5) == 0) return leaf();
    for (int tries = 0; tries < 24; ++tries) {
      int n_ops = allow_piecewise ? 12 : 9;
      int op = pick(n_ops);
      ExprId a = gen(depth - 1);
      double va;
      if (!acceptable(a, &va)) continue;
      ExprId candidate = kNoId;
      switch (op) {
        case 0:
        case 1: {  // add / sub
          ExprId b = gen(depth - 1);
          double vb;
          if (!acceptable(b, &vb)) continue;
          candidate = pool.binary(op == 0 ? BinaryOp::Add : BinaryOp::Sub, a, b);
          break;
        }
        case 2: {  // mul
          ExprId b = gen(depth - 1);
          double vb;
          if (!acceptable(b, &vb)) continue;
          candidate = pool.mul(a, b);
          break;
        }
        case 3: {  // div, divisor away from zero
          ExprId b = gen(depth - 1);
          double vb;
          if (!acceptable(b, &vb) || std::fabs(vb) < 0.1) continue;
          candidate = pool.div(a, b);
          break;
        }
        case 4:
          candidate = pool.unary(UnaryOp::Sin, a);
          break;
        case 5:
          candidate = pool.unary(UnaryOp::Cos, a);
          break;
        case 6:  // sqrt needs a comfortably positive argument
          if (va < 0.01) continue;
          candidate = pool.unary(UnaryOp::Sqrt, a);
          break;
        case 7:
          if (std::fabs(va) > 31.0) continue;
          candidate = pool.square(a);
          break;
        case 8:
          candidate = pool.neg(a);
          break;
        case 9: {  // min
          ExprId b = gen(depth - 1);
          double vb;
          if (!acceptable(b, &vb)) continue;
          candidate = pool.binary(BinaryOp::Min, a, b);
          break;
        }
        case 10: {  // max
          ExprId b = gen(depth - 1);
          double vb;
          if (!acceptable(b, &vb)) continue;
          candidate = pool.binary(BinaryOp::Max, a, b);
          break;
        }
        case 11:
          candidate = pool.unary(pick(2) == 0 ? UnaryOp::Abs : UnaryOp::Norm, a);
          break;
      }
      double v;
      if (candidate != kNoId && acceptable(candidate, &v)) return candidate;
    }
    return leaf();
  }
};

// Central finite difference d(expr)/d(p) with h scaled to the parameter.
inline double central_difference(const ExprPool& pool, ExprId e, ParamId p,
                                 std::vector<double>& values) {
  double x = values[p];
  double h = 1e-6 * std::max(1.0, std::fabs(x));
  values[p] = x + h;
  double fp = eval(pool, e, values);
  values[p] = x - h;
  double fm = eval(pool, e, values);
  values[p] = x;
  return (fp - fm) / (2 * h);
}

inline bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace aidl::testing
