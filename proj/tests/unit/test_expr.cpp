#include <doctest.h>

#include <cmath>
#include <cstring>

#include "expr.hpp"
#include "test_util.hpp"

using namespace aidl;

TEST_CASE("eval of basic operations") {
  ExprPool pool;
  std::vector<double> vals{0.0};

  CHECK(eval(pool, pool.binary(BinaryOp::Min, pool.constant(2), pool.constant(3)), vals) == 2);
  CHECK(eval(pool, pool.square(pool.param(0)), vals) == 0);
  // abs(3 - 7) = 4
  ExprId e = pool.unary(UnaryOp::Abs, pool.sub(pool.constant(3), pool.constant(7)));
  CHECK(eval(pool, e, vals) == 4);
}

TEST_CASE("eval domain errors") {
  ExprPool pool;
  std::vector<double> vals{-1.0, 0.0};
  CHECK_THROWS_AS(eval(pool, pool.unary(UnaryOp::Sqrt, pool.param(0)), vals), DomainError);
  ExprId arg = pool.constant(1.5);
  // constant folding cannot fold out-of-domain constants, so eval still throws
  CHECK_THROWS_AS(eval(pool, pool.unary(UnaryOp::Arcsin, arg), vals), DomainError);
  CHECK_THROWS_AS(eval(pool, pool.div(pool.constant(1), pool.param(1)), vals), DomainError);
}

TEST_CASE("differentiate basics") {
  ExprPool pool;
  ParamId x = 0;
  std::vector<double> vals{1.0};

  ExprId dsq = differentiate(pool, pool.square(pool.param(x)), x);
  CHECK(to_sexpr(pool, dsq, [](ParamId) { return "x"; }) == "(mul 2 (param \"x\"))");

  ExprId dc = differentiate(pool, pool.constant(5), x);
  CHECK(pool.node(dc).kind == ExprKind::Const);
  CHECK(pool.node(dc).value == 0.0);

  // d/dx [x sin x] = sin x + x cos x
  ExprId f = pool.mul(pool.param(x), pool.unary(UnaryOp::Sin, pool.param(x)));
  double sym = eval(pool, differentiate(pool, f, x), vals);
  CHECK(sym == doctest::Approx(std::sin(1.0) + std::cos(1.0)).epsilon(1e-9));
  double fd = testing::central_difference(pool, f, x, vals);
  CHECK(testing::close_rel(sym, fd, 1e-4));
}

TEST_CASE("differentiate rejects piecewise expressions") {
  ExprPool pool;
  ExprId e = pool.unary(UnaryOp::Abs, pool.param(0));
  CHECK_THROWS_AS(differentiate(pool, e, 0), BranchyExpression);
  ExprId n = pool.unary(UnaryOp::Norm, pool.param(0));
  CHECK_THROWS_AS(differentiate(pool, n, 0), BranchyExpression);
}

TEST_CASE("pin_branches selects active branches") {
  ExprPool pool;
  // a=1, b=2, p=5, q=2, r=4, s=-3
  std::vector<double> vals{1, 2, 5, 2, 4, -3};
  ExprId a = pool.param(0), b = pool.param(1);
  ExprId p = pool.param(2), q = pool.param(3), r = pool.param(4), s = pool.param(5);

  CHECK(pin_branches(pool, pool.binary(BinaryOp::Min, a, b), vals) == a);
  CHECK(pin_branches(pool, pool.unary(UnaryOp::Abs, s), vals) == pool.neg(s));

  ExprId nested = pool.binary(BinaryOp::Max, pool.binary(BinaryOp::Min, p, q), r);
  ExprId pinned = pin_branches(pool, nested, vals);
  CHECK(pinned == r);
  CHECK(eval(pool, pinned, vals) == eval(pool, nested, vals));
}

TEST_CASE("pinning ties are deterministic") {
  ExprPool pool;
  std::vector<double> vals{3, 3, 0};
  ExprId a = pool.param(0), b = pool.param(1), z = pool.param(2);
  // equal operands pin to the first, abs of zero pins positive
  CHECK(pin_branches(pool, pool.binary(BinaryOp::Min, a, b), vals) == a);
  CHECK(pin_branches(pool, pool.binary(BinaryOp::Max, a, b), vals) == a);
  CHECK(pin_branches(pool, pool.unary(UnaryOp::Abs, z), vals) == z);
}

TEST_CASE("derivative matches central finite differences on random expressions") {
  ExprPool pool;
  std::vector<double> vals(4);
  std::vector<ParamId> params{0, 1, 2, 3};
  testing::ExprGen gen(pool, params, vals, 20240801u);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    for (double& v : vals) v = gen.uniform(-10, 10);
    ExprId e = gen.gen(8);
    for (ParamId p : params) {
      ExprId de = differentiate(pool, e, p);
      double sym, fd;
      try {
        sym = eval(pool, de, vals);
        fd = testing::central_difference(pool, e, p, vals);
      } catch (const DomainError&) {
        continue;  // derivative grazes a boundary the generator kept out of
      }
      if (!std::isfinite(sym) || !std::isfinite(fd) || std::fabs(fd) > 1e6) continue;
      ++checked;
      CHECK(testing::close_rel(sym, fd, 1e-4));
    }
  }
  CHECK(checked > 400);
}

TEST_CASE("pinning preserves evaluation exactly and is idempotent") {
  ExprPool pool;
  std::vector<double> vals(3);
  std::vector<ParamId> params{0, 1, 2};
  testing::ExprGen gen(pool, params, vals, 97u, /*piecewise=*/true);
  for (int i = 0; i < 200; ++i) {
    for (double& v : vals) v = gen.uniform(-10, 10);
    ExprId e = gen.gen(6);
    ExprId pinned = pin_branches(pool, e, vals);
    double orig, after;
    try {
      orig = eval(pool, e, vals);
      after = eval(pool, pinned, vals);
    } catch (const DomainError&) {
      continue;
    }
    CHECK(orig == after);  // exact floating-point equality
    CHECK(pin_branches(pool, pinned, vals) == pinned);
    // pinned expression is branch-free
    ExprId roots[1] = {pinned};
    CHECK(collect_piecewise(pool, roots).empty());
  }
}

TEST_CASE("evaluation is deterministic") {
  ExprPool pool;
  std::vector<double> vals{1.7, -2.3};
  std::vector<ParamId> params{0, 1};
  testing::ExprGen gen(pool, params, vals, 7u, true);
  for (int i = 0; i < 50; ++i) {
    ExprId e = gen.gen(7);
    double a, b;
    try {
      a = eval(pool, e, vals);
      b = eval(pool, e, vals);
    } catch (const DomainError&) {
      continue;
    }
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  }
}

TEST_CASE("hash consing shares structurally equal nodes") {
  ExprPool pool;
  ExprId a = pool.add(pool.param(0), pool.constant(1));
  ExprId b = pool.add(pool.param(0), pool.constant(1));
  CHECK(a == b);
  CHECK(pool.constant(2.0) == pool.constant(2.0));
  CHECK(pool.constant(2.0) != pool.constant(3.0));
}

TEST_CASE("expression serialization to s-expressions") {
  ExprPool pool;
  ExprId e = pool.mul(pool.constant(2), pool.param(0));
  auto name = [](ParamId) { return std::string("width"); };
  CHECK(to_sexpr(pool, e, name) == "(mul 2 (param \"width\"))");
}
