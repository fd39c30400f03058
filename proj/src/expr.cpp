#include "expr.hpp"

#include <cmath>
#include <cstring>

#include "numfmt.hpp"

namespace aidl {

const char* unary_op_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "neg";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Arcsin: return "arcsin";
    case UnaryOp::Arccos: return "arccos";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
    case UnaryOp::Norm: return "norm";
    case UnaryOp::Square: return "square";
  }
  return "?";
}

const char* binary_op_name(BinaryOp op) {
  switch (op) {
    case BinaryOp::Sub: return "sub";
    case BinaryOp::Add: return "add";
    case BinaryOp::Mul: return "mul";
    case BinaryOp::Div: return "div";
    case BinaryOp::Min: return "min";
    case BinaryOp::Max: return "max";
  }
  return "?";
}

double eval_unary(UnaryOp op, double x) {
  switch (op) {
    case UnaryOp::Neg: return -x;
    case UnaryOp::Sin: return std::sin(x);
    case UnaryOp::Cos: return std::cos(x);
    case UnaryOp::Arcsin:
      if (std::fabs(x) > 1.0) throw DomainError{"arcsin", x};
      return std::asin(x);
    case UnaryOp::Arccos:
      if (std::fabs(x) > 1.0) throw DomainError{"arccos", x};
      return std::acos(x);
    case UnaryOp::Sqrt:
      if (x < 0.0) throw DomainError{"sqrt", x};
      return std::sqrt(x);
    case UnaryOp::Abs:
      return std::fabs(x);
    case UnaryOp::Norm:
      return std::fabs(x);
    case UnaryOp::Square:
      return x * x;
  }
  throw DomainError{"unary", x};
}

double eval_binary(BinaryOp op, double l, double r) {
  switch (op) {
    case BinaryOp::Sub: return l - r;
    case BinaryOp::Add: return l + r;
    case BinaryOp::Mul: return l * r;
    case BinaryOp::Div:
      if (std::fabs(r) < kDivTolerance) throw DomainError{"div", r};
      return l / r;
    // Tie goes to the left operand; choose_branches matches this exactly.
    case BinaryOp::Min: return r < l ? r : l;
    case BinaryOp::Max: return l < r ? r : l;
  }
  throw DomainError{"binary", l};
}

namespace {

std::uint64_t hash_node(const ExprNode& n) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(n.kind));
  mix(n.op);
  mix(n.a);
  mix(n.b);
  std::uint64_t bits;
  std::memcpy(&bits, &n.value, sizeof bits);
  mix(bits);
  mix(n.param);
  return h;
}

bool same_node(const ExprNode& x, const ExprNode& y) {
  if (x.kind != y.kind || x.op != y.op || x.a != y.a || x.b != y.b || x.param != y.param)
    return false;
  std::uint64_t xb, yb;
  std::memcpy(&xb, &x.value, sizeof xb);
  std::memcpy(&yb, &y.value, sizeof yb);
  return xb == yb;  // bit comparison so -0.0 and 0.0 stay distinct
}

}  // namespace

ExprId ExprPool::intern(const ExprNode& n) {
  auto& bucket = buckets_[hash_node(n)];
  for (ExprId id : bucket)
    if (same_node(nodes_[id], n)) return id;
  ExprId id = static_cast<ExprId>(nodes_.size());
  nodes_.push_back(n);
  bucket.push_back(id);
  return id;
}

ExprId ExprPool::constant(double v) {
  ExprNode n;
  n.kind = ExprKind::Const;
  n.value = v;
  return intern(n);
}

ExprId ExprPool::param(ParamId p) {
  ExprNode n;
  n.kind = ExprKind::Param;
  n.param = p;
  return intern(n);
}

ExprId ExprPool::unary(UnaryOp op, ExprId a) {
  const ExprNode& ca = nodes_[a];
  if (ca.kind == ExprKind::Const) {
    try {
      return constant(eval_unary(op, ca.value));
    } catch (const DomainError&) {
      // leave unfolded; evaluation reports the domain error
    }
  }
  ExprNode n;
  n.kind = ExprKind::Unary;
  n.op = static_cast<std::uint8_t>(op);
  n.a = a;
  return intern(n);
}

ExprId ExprPool::binary(BinaryOp op, ExprId a, ExprId b) {
  const ExprNode& ca = nodes_[a];
  const ExprNode& cb = nodes_[b];
  if (ca.kind == ExprKind::Const && cb.kind == ExprKind::Const) {
    try {
      return constant(eval_binary(op, ca.value, cb.value));
    } catch (const DomainError&) {
    }
  }
  ExprNode n;
  n.kind = ExprKind::Binary;
  n.op = static_cast<std::uint8_t>(op);
  n.a = a;
  n.b = b;
  return intern(n);
}

double Evaluator::eval(ExprId id) {
  if (memo_.size() < pool_->size()) {
    memo_.resize(pool_->size(), 0.0);
    seen_.resize(pool_->size(), 0);
  }
  if (seen_[id] == stamp_) return memo_[id];
  const ExprNode& n = pool_->node(id);
  double v = 0.0;
  switch (n.kind) {
    case ExprKind::Const: v = n.value; break;
    case ExprKind::Param: v = values_[n.param]; break;
    case ExprKind::Unary: v = eval_unary(static_cast<UnaryOp>(n.op), eval(n.a)); break;
    case ExprKind::Binary:
      v = eval_binary(static_cast<BinaryOp>(n.op), eval(n.a), eval(n.b));
      break;
  }
  memo_[id] = v;
  seen_[id] = stamp_;
  return v;
}

double eval(const ExprPool& pool, ExprId id, std::span<const double> values) {
  Evaluator ev(pool, values);
  return ev.eval(id);
}

namespace {

// 0/1 pruning so derivative trees stay readable; anything fancier is out of
// scope for this pool.
bool is_const(const ExprPool& p, ExprId id, double v) {
  const ExprNode& n = p.node(id);
  return n.kind == ExprKind::Const && n.value == v;
}

ExprId d_add(ExprPool& p, ExprId a, ExprId b) {
  if (is_const(p, a, 0.0)) return b;
  if (is_const(p, b, 0.0)) return a;
  return p.add(a, b);
}

ExprId d_sub(ExprPool& p, ExprId a, ExprId b) {
  if (is_const(p, b, 0.0)) return a;
  if (is_const(p, a, 0.0)) return p.neg(b);
  return p.sub(a, b);
}

ExprId d_mul(ExprPool& p, ExprId a, ExprId b) {
  if (is_const(p, a, 0.0) || is_const(p, b, 0.0)) return p.constant(0.0);
  if (is_const(p, a, 1.0)) return b;
  if (is_const(p, b, 1.0)) return a;
  return p.mul(a, b);
}

struct Differ {
  ExprPool& pool;
  ParamId wrt;
  std::unordered_map<ExprId, ExprId> memo;

  ExprId run(ExprId id) {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    ExprId out = derive(id);
    memo.emplace(id, out);
    return out;
  }

  ExprId derive(ExprId id) {
    const ExprNode n = pool.node(id);
    switch (n.kind) {
      case ExprKind::Const:
        return pool.constant(0.0);
      case ExprKind::Param:
        return pool.constant(n.param == wrt ? 1.0 : 0.0);
      case ExprKind::Unary: {
        auto op = static_cast<UnaryOp>(n.op);
        if (is_piecewise(op)) throw BranchyExpression{id};
        ExprId u = n.a;
        ExprId du = run(u);
        switch (op) {
          case UnaryOp::Neg: return is_const(pool, du, 0.0) ? du : pool.neg(du);
          case UnaryOp::Sin: return d_mul(pool, pool.unary(UnaryOp::Cos, u), du);
          case UnaryOp::Cos:
            return is_const(pool, du, 0.0)
                       ? pool.constant(0.0)
                       : pool.neg(d_mul(pool, pool.unary(UnaryOp::Sin, u), du));
          case UnaryOp::Arcsin:
            // du / sqrt(1 - u^2)
            return is_const(pool, du, 0.0)
                       ? pool.constant(0.0)
                       : pool.div(du, pool.unary(UnaryOp::Sqrt,
                                                 pool.sub(pool.constant(1.0), pool.square(u))));
          case UnaryOp::Arccos:
            return is_const(pool, du, 0.0)
                       ? pool.constant(0.0)
                       : pool.neg(pool.div(du,
                                           pool.unary(UnaryOp::Sqrt,
                                                      pool.sub(pool.constant(1.0),
                                                               pool.square(u)))));
          case UnaryOp::Sqrt:
            // du / (2 sqrt(u))
            return is_const(pool, du, 0.0)
                       ? pool.constant(0.0)
                       : pool.div(du, d_mul(pool, pool.constant(2.0),
                                            pool.unary(UnaryOp::Sqrt, u)));
          case UnaryOp::Square:
            return d_mul(pool, d_mul(pool, pool.constant(2.0), u), du);
          default:
            throw BranchyExpression{id};
        }
      }
      case ExprKind::Binary: {
        auto op = static_cast<BinaryOp>(n.op);
        if (is_piecewise(op)) throw BranchyExpression{id};
        ExprId dl = run(n.a);
        ExprId dr = run(n.b);
        switch (op) {
          case BinaryOp::Add: return d_add(pool, dl, dr);
          case BinaryOp::Sub: return d_sub(pool, dl, dr);
          case BinaryOp::Mul:
            return d_add(pool, d_mul(pool, dl, n.b), d_mul(pool, n.a, dr));
          case BinaryOp::Div:
            // (dl*v - u*dr) / v^2
            return pool.div(d_sub(pool, d_mul(pool, dl, n.b), d_mul(pool, n.a, dr)),
                            pool.square(n.b));
          default:
            throw BranchyExpression{id};
        }
      }
    }
    throw BranchyExpression{id};
  }
};

}  // namespace

ExprId differentiate(ExprPool& pool, ExprId id, ParamId wrt) {
  Differ d{pool, wrt, {}};
  return d.run(id);
}

std::vector<ExprId> collect_piecewise(const ExprPool& pool, std::span<const ExprId> roots) {
  // Pre-order DFS, children left-to-right, each node visited once.
  std::vector<ExprId> out;
  std::vector<char> visited(pool.size(), 0);
  std::vector<ExprId> work;
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) work.push_back(*it);
  while (!work.empty()) {
    ExprId id = work.back();
    work.pop_back();
    if (visited[id]) continue;
    visited[id] = 1;
    const ExprNode& n = pool.node(id);
    if (n.kind == ExprKind::Unary) {
      if (is_piecewise(static_cast<UnaryOp>(n.op))) out.push_back(id);
      work.push_back(n.a);
    } else if (n.kind == ExprKind::Binary) {
      if (is_piecewise(static_cast<BinaryOp>(n.op))) out.push_back(id);
      work.push_back(n.b);
      work.push_back(n.a);
    }
  }
  return out;
}

PinPattern choose_branches(const ExprPool& pool, std::span<const ExprId> piecewise,
                           std::span<const double> values) {
  PinPattern pat;
  pat.nodes.assign(piecewise.begin(), piecewise.end());
  pat.choice.resize(pat.nodes.size());
  Evaluator ev(pool, values);
  for (std::size_t i = 0; i < pat.nodes.size(); ++i) {
    const ExprNode& n = pool.node(pat.nodes[i]);
    if (n.kind == ExprKind::Binary) {
      double l = ev.eval(n.a);
      double r = ev.eval(n.b);
      if (static_cast<BinaryOp>(n.op) == BinaryOp::Min)
        pat.choice[i] = r < l ? 1 : 0;
      else
        pat.choice[i] = l < r ? 1 : 0;
    } else {
      // abs/norm: ties (exactly zero) pin to the positive branch
      pat.choice[i] = ev.eval(n.a) < 0.0 ? 1 : 0;
    }
  }
  return pat;
}

namespace {

struct Pinner {
  ExprPool& pool;
  std::unordered_map<ExprId, std::uint8_t> choice;
  std::unordered_map<ExprId, ExprId> memo;

  ExprId run(ExprId id) {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    const ExprNode n = pool.node(id);
    ExprId out = id;
    switch (n.kind) {
      case ExprKind::Const:
      case ExprKind::Param:
        break;
      case ExprKind::Unary: {
        auto op = static_cast<UnaryOp>(n.op);
        ExprId a = run(n.a);
        if (is_piecewise(op)) {
          auto c = choice.find(id);
          out = (c != choice.end() && c->second == 1) ? pool.neg(a) : a;
        } else {
          out = (a == n.a) ? id : pool.unary(op, a);
        }
        break;
      }
      case ExprKind::Binary: {
        auto op = static_cast<BinaryOp>(n.op);
        if (is_piecewise(op)) {
          auto c = choice.find(id);
          out = run((c != choice.end() && c->second == 1) ? n.b : n.a);
        } else {
          ExprId a = run(n.a);
          ExprId b = run(n.b);
          out = (a == n.a && b == n.b) ? id : pool.binary(op, a, b);
        }
        break;
      }
    }
    memo.emplace(id, out);
    return out;
  }
};

}  // namespace

std::vector<ExprId> apply_pins(ExprPool& pool, std::span<const ExprId> roots,
                               const PinPattern& pattern) {
  Pinner p{pool, {}, {}};
  for (std::size_t i = 0; i < pattern.nodes.size(); ++i)
    p.choice.emplace(pattern.nodes[i], pattern.choice[i]);
  std::vector<ExprId> out;
  out.reserve(roots.size());
  for (ExprId r : roots) out.push_back(p.run(r));
  return out;
}

ExprId pin_branches(ExprPool& pool, ExprId id, std::span<const double> values) {
  ExprId roots[1] = {id};
  auto piecewise = collect_piecewise(pool, roots);
  if (piecewise.empty()) return id;
  PinPattern pat = choose_branches(pool, piecewise, values);
  return apply_pins(pool, roots, pat)[0];
}

namespace {

void sexpr_rec(const ExprPool& pool, ExprId id,
               const std::function<std::string(ParamId)>& param_name, std::string& out) {
  const ExprNode& n = pool.node(id);
  switch (n.kind) {
    case ExprKind::Const:
      out += fmt_double(n.value);
      break;
    case ExprKind::Param:
      out += "(param \"";
      out += param_name(n.param);
      out += "\")";
      break;
    case ExprKind::Unary:
      out += '(';
      out += unary_op_name(static_cast<UnaryOp>(n.op));
      out += ' ';
      sexpr_rec(pool, n.a, param_name, out);
      out += ')';
      break;
    case ExprKind::Binary:
      out += '(';
      out += binary_op_name(static_cast<BinaryOp>(n.op));
      out += ' ';
      sexpr_rec(pool, n.a, param_name, out);
      out += ' ';
      sexpr_rec(pool, n.b, param_name, out);
      out += ')';
      break;
  }
}

}  // namespace

std::string to_sexpr(const ExprPool& pool, ExprId id,
                     const std::function<std::string(ParamId)>& param_name) {
  std::string out;
  sexpr_rec(pool, id, param_name, out);
  return out;
}

}  // namespace aidl
