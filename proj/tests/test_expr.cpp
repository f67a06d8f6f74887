#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pg/expr.hpp"
#include "support/rng.hpp"

using pg::Expr;
using pg::parse_expr;

namespace {

double fd_partial(const Expr& e, pg::Point p, int slot, double h = 1e-6) {
  pg::Point hi = p, lo = p;
  hi[slot] += h;
  lo[slot] -= h;
  return (e.eval(hi) - e.eval(lo)) / (2.0 * h);
}

}  // namespace

TEST_CASE("parse evaluates projections and arithmetic") {
  CHECK(parse_expr("x1", 2, false).eval({3.0, 7.0}) == 3.0);
  CHECK(parse_expr("x1*sin(x2) + 2^3", 2, false).eval({1.0, 0.0}) == 8.0);
  CHECK(parse_expr("1 + 2*3", 1, false).eval({0.0}) == 7.0);
  CHECK(parse_expr("2*x1/4", 1, false).eval({6.0}) == 3.0);
  CHECK(parse_expr("1.5e2", 1, false).eval({0.0}) == 150.0);
}

TEST_CASE("parse rejects bad input with located errors") {
  CHECK_THROWS_WITH(parse_expr("x1 + y", 2, false),
                    Catch::Matchers::ContainsSubstring("unknown identifier y"));
  CHECK_THROWS_AS(parse_expr("x3", 2, false), pg::ParseError);
  CHECK_THROWS_AS(parse_expr("x0", 2, false), pg::ParseError);
  CHECK_THROWS_AS(parse_expr("t*x1", 2, false), pg::ParseError);
  CHECK_NOTHROW(parse_expr("t*x1", 2, true));
  CHECK_THROWS_AS(parse_expr("x1 +", 2, false), pg::ParseError);
  CHECK_THROWS_AS(parse_expr("(x1", 2, false), pg::ParseError);
  CHECK_THROWS_AS(parse_expr("x1 x2", 2, false), pg::ParseError);
  // exponent must be an integer literal unless the base is provably positive
  CHECK_THROWS_AS(parse_expr("x1^x2", 2, false), pg::ParseError);
  CHECK_THROWS_AS(parse_expr("x1^0.5", 2, false), pg::ParseError);
  CHECK_NOTHROW(parse_expr("2^0.5", 1, false));
  CHECK(parse_expr("2^0.5", 1, false).eval({0.0}) ==
        Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(parse_expr("exp(x1)^0.5", 1, false).eval({2.0}) ==
        Catch::Approx(std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("grammar precedence and associativity") {
  // ^ before * / before + -
  CHECK(parse_expr("2*3^2", 1, false).eval({0.0}) == 18.0);
  CHECK(parse_expr("1+2*3^2", 1, false).eval({0.0}) == 19.0);
  // per the grammar, a leading unary minus wraps the whole power
  CHECK(parse_expr("-x1^2", 1, false).eval({3.0}) == -9.0);
  CHECK(parse_expr("x1^-2", 1, false).eval({2.0}) == 0.25);
  // ^ is right-associative: 2^(3^2)
  CHECK(parse_expr("2^3^2", 1, false).eval({0.0}) == 512.0);
}

TEST_CASE("eval reports domain errors instead of NaN") {
  CHECK_THROWS_WITH(parse_expr("x1/x2", 2, false).eval({1.0, 0.0}),
                    Catch::Matchers::ContainsSubstring("division by zero"));
  CHECK_THROWS_AS(parse_expr("log(x1)", 1, false).eval({-1.0}), pg::EvalError);
  CHECK_THROWS_AS(parse_expr("log(x1)", 1, false).eval({0.0}), pg::EvalError);
  CHECK_THROWS_AS(parse_expr("sqrt(x1)", 1, false).eval({-4.0}), pg::EvalError);
  CHECK_THROWS_AS(parse_expr("x1^-1", 1, false).eval({0.0}), pg::EvalError);
  CHECK(parse_expr("exp(log(x1))", 1, false).eval({5.0}) ==
        Catch::Approx(5.0).epsilon(1e-15));
  Expr e = parse_expr("t*x1", 1, true);
  CHECK(e.eval({4.0}, 0.5) == 2.0);
  CHECK_THROWS_AS(e.eval({4.0}), pg::EvalError);
}

TEST_CASE("diff applies structural rules exactly") {
  Expr e = parse_expr("x1*sin(x2)", 2, false);
  CHECK(e.diff(1).eval({1.0, 0.0}) == 1.0);  // x1*cos(x2) at (1,0)

  Expr c = Expr::constant(4.25);
  CHECK(c.diff(0).is_zero());

  Expr cube = parse_expr("x1^3", 1, false);
  CHECK(cube.diff(0).eval({2.0}) == 12.0);

  Expr q = parse_expr("x1/x2", 2, false);
  CHECK(q.diff(1).eval({3.0, 2.0}) == Catch::Approx(-0.75).epsilon(1e-15));

  Expr s = parse_expr("sqrt(x1)", 1, false);
  CHECK(s.diff(0).eval({4.0}) == Catch::Approx(0.25).epsilon(1e-15));

  Expr tpar = parse_expr("t^2*x1", 1, true);
  CHECK(tpar.diff(pg::kTimeSlot).eval({3.0}, 2.0) == 12.0);
}

TEST_CASE("derivatives of random polynomials match central differences") {
  pgtest::Rng rng(12345);
  for (int trial = 0; trial < 1000; ++trial) {
    int dim = rng.uniform_int(1, 4);
    Expr e = rng.poly(dim, 5, 3);
    pg::Point p = rng.point(dim);
    int slot = rng.uniform_int(0, dim - 1);
    double exact = e.diff(slot).eval(p);
    double approx = fd_partial(e, p, slot);
    double scale = std::max({1.0, std::abs(exact), std::abs(approx)});
    REQUIRE(std::abs(exact - approx) <= 1e-6 * scale);
  }
}

TEST_CASE("mixed partials commute on smooth expressions") {
  pgtest::Rng rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    int dim = 3;
    Expr base = rng.poly(dim, 4, 2);
    Expr e = sin(base) + base * cos(base);
    pg::Point p = rng.point(dim);
    int i = rng.uniform_int(0, dim - 1);
    int j = rng.uniform_int(0, dim - 1);
    double a = e.diff(i).diff(j).eval(p);
    double b = e.diff(j).diff(i).eval(p);
    REQUIRE(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("print then parse is stable") {
  pgtest::Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    int dim = rng.uniform_int(1, 3);
    Expr e = rng.poly(dim, 4, 3);
    std::string once = e.str();
    Expr r = parse_expr(once, dim, false);
    CHECK(r.str() == once);
    pg::Point p = rng.point(dim);
    CHECK(r.eval(p) == e.eval(p));  // bitwise: same tree walk
  }

  Expr f = parse_expr("-x1^2 + sin(x2)/(1+x1)", 2, false);
  std::string s1 = f.str();
  std::string s2 = parse_expr(s1, 2, false).str();
  CHECK(s1 == s2);
}

TEST_CASE("evaluation is deterministic") {
  Expr e = parse_expr("x1*sin(x2) + exp(x1)/(2 + cos(x2))", 2, false);
  pg::Point p = {0.31830988618379067, -1.6180339887498949};
  double first = e.eval(p);
  for (int i = 0; i < 16; ++i) REQUIRE(e.eval(p) == first);
}

TEST_CASE("substitute composes coordinate changes") {
  // y = (x1, x2 + x1^2), composed back should be identity
  Expr e = parse_expr("x2", 2, false);
  std::vector<Expr> fwd = {Expr::var(0),
                           Expr::var(1) + pow(Expr::var(0), 2)};
  Expr pushed = e.substitute(fwd);
  CHECK(pushed.eval({2.0, 1.0}) == 5.0);
}
