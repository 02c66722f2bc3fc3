#include "doctest.h"
#include "frob/expr.hpp"

#include <cmath>
#include <random>

using namespace frob;

namespace {
const std::vector<std::string> kXYZ{"x", "y", "z"};
}

TEST_CASE("parse and evaluate") {
  Expr e = parse_expr("2*x + y^2 - z/4", kXYZ);
  CHECK(e.eval(Vector{{1.0, 3.0, 8.0}}) == doctest::Approx(9.0));
  CHECK(parse_expr("-x^2", kXYZ).eval(Vector{{3.0, 0, 0}}) == doctest::Approx(-9.0));
  CHECK(parse_expr("2^3^2", kXYZ).eval(Vector{{0.0, 0, 0}}) == doctest::Approx(512.0));
  CHECK(parse_expr("exp(log(x))", kXYZ).eval(Vector{{2.5, 0, 0}}) == doctest::Approx(2.5));
  CHECK(parse_expr("sin(pi/2) + cos(0) + abs(-3) + sqrt(4) + sign(-x)", kXYZ).eval(Vector{{1.0, 0, 0}}) ==
        doctest::Approx(6.0));
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_expr("x +\n  * y", kXYZ);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column >= 3);
  }
  CHECK_THROWS_AS(parse_expr("w + 1", kXYZ), ParseError);
  CHECK_THROWS_AS(parse_expr("(x", kXYZ), ParseError);
}

TEST_CASE("simplification collects like terms") {
  Expr x = Expr::var(0), y = Expr::var(1);
  CHECK((x - x).is_zero());
  CHECK((x * y - y * x).is_zero());
  CHECK(structurally_equal(x + x, 2.0 * x));
  CHECK((x * 0.0).is_zero());
  CHECK((Expr(3.0) + 4.0).constant_value() == 7.0);
}

TEST_CASE("derivatives match finite differences") {
  Expr e = parse_expr("x*log(y) + exp(x*z) - y^0.7 + sin(x)*cos(z) / (1 + y^2)", kXYZ);
  Vector p{{0.3, 1.7, -0.4}};
  for (int i = 0; i < 3; ++i) {
    Vector a = p, b = p;
    const double h = 1e-6;
    a[i] += h;
    b[i] -= h;
    const double fd = (e.eval(a) - e.eval(b)) / (2 * h);
    CHECK(e.diff(i).eval(p) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("mixed partials are structurally equal") {
  std::mt19937 rng(7);
  const char* samples[] = {"x*y*z", "log(1+x^2)*exp(y)", "abs(x)^1.5*sin(y*z)", "x/(2+y*z)", "sqrt(1+x^2+y^2)"};
  for (const char* s : samples) {
    Expr e = parse_expr(s, kXYZ);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK((e.diff(i).diff(j) - e.diff(j).diff(i)).is_zero());
  }
}

TEST_CASE("removable singularities and domain checks") {
  Expr e = parse_expr("x*log(x)", kXYZ);
  CHECK(e.eval(Vector{{0.0, 0, 0}}) == 0.0);
  CHECK_THROWS_AS(parse_expr("log(x)", kXYZ).eval(Vector{{-1.0, 0, 0}}), DomainError);
  CHECK_THROWS_AS(parse_expr("x^0.5", kXYZ).eval(Vector{{-1.0, 0, 0}}), DomainError);
  CHECK(parse_expr("abs(x)^(2/3)", kXYZ).eval(Vector{{-8.0, 0, 0}}) == doctest::Approx(4.0));
}

TEST_CASE("ExprVector jacobian") {
  ExprVector v = parse_vector({"x*y", "z + x^2"}, kXYZ);
  Matrix j = v.jacobian(Vector{{2.0, 3.0, 5.0}});
  CHECK(j(0, 0) == doctest::Approx(3.0));
  CHECK(j(0, 1) == doctest::Approx(2.0));
  CHECK(j(1, 0) == doctest::Approx(4.0));
  CHECK(j(1, 2) == doctest::Approx(1.0));
  CHECK(split_names("t, x ,y") == std::vector<std::string>{"t", "x", "y"});
}

TEST_CASE("printing round-trips") {
  const char* samples[] = {"x*log(y) - z^2/3", "exp(-x)*sin(2*y)", "abs(x)^(2/3) + 1"};
  Vector p{{0.4, 1.3, 0.7}};
  for (const char* s : samples) {
    Expr e = parse_expr(s, kXYZ);
    Expr back = parse_expr(e.str(kXYZ), kXYZ);
    CHECK(back.eval(p) == doctest::Approx(e.eval(p)).epsilon(1e-14));
  }
}
