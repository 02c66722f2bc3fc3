#include "doctest.h"
#include "frob/pdelab.hpp"
#include "frob/surface.hpp"

#include <cmath>
#include <random>

using namespace frob;

TEST_CASE("hat matrix and submatrices") {
  PdeSpec ex3 = example3();
  const Matrix h = hat_matrix(ex3, Vector::Zero(4));
  CHECK(h == (Matrix(2, 4) << 1, 0, 1, 0, 0, 1, 0, 0).finished());
  // Columns (2, 3) are y² and x¹ here; the minor is a permutation.
  CHECK(determinant(submatrix(hat_matrix(ex3), {2, 3})).eval(Vector::Zero(4)) == -1.0);
  CHECK(hat_column_coordinate(ex3, 2) == 3);
  CHECK(hat_column_coordinate(ex3, 3) == 0);

  for (const auto& spec : {ex3, example2(0.8, 0.4)}) {
    const Expr id = determinant(submatrix(hat_matrix(spec), {1, 2}));
    CHECK(id.is_constant());
    CHECK(id.constant_value() == 1.0);
  }

  PdeSpec one = PdeSpec::parse({"x", "y"}, 1, {{"2.5"}}, Box::cube(2, -1, 1));
  CHECK(hat_matrix(one, Vector::Zero(2)) == (Matrix(1, 2) << 1, 2.5).finished());
  CHECK(determinant(submatrix(hat_matrix(one), {2})).constant_value() == 2.5);
  CHECK_THROWS_AS(submatrix(hat_matrix(ex3), {3, 2}), DomainError);
  CHECK_THROWS_AS(submatrix(hat_matrix(ex3), {1}), DomainError);
  CHECK_THROWS_AS(submatrix(hat_matrix(ex3), {1, 5}), DomainError);
}

TEST_CASE("pde certificates") {
  PdeSpec ex2 = example2(0.8, 0.4);
  auto c = theorem2_check(ex2, Vector{{0.5, 0.5, 0.5, 0.5}}, {1, 2});
  CHECK(c.applicable);
  CHECK(c.w1_declared);
  CHECK(c.w2_declared);
  CHECK(c.verdict == Verdict::Holds);
  CHECK(c.report.fitted_slope(1e-8, 1e-3) == doctest::Approx(0.4).epsilon(0.1));

  // As stated, the Hoelder group sits below the log-Lipschitz group, so the
  // limit w1·e^{w2/s} = s^{β−α} blows up.
  auto stated = theorem2_check(example3(), Vector::Zero(4), {2, 3});
  CHECK(stated.applicable);
  CHECK(stated.det == -1.0);
  CHECK(stated.verdict == Verdict::Fails);
  Example3Params rev{0.3, 0.7, 0.3, 0.7, 0.7, 0.3};
  CHECK(theorem2_check(example3(rev), Vector::Zero(4), {2, 3}).verdict == Verdict::Holds);

  PdeSpec lip = PdeSpec::parse({"x1", "x2", "y"}, 2, {{"y + x1", "sin(y)*x2"}}, Box::cube(3, -1, 1));
  CHECK(theorem2_check(lip, Vector{{0.1, 0.2, 0.3}}, {1}).verdict == Verdict::Holds);

  PdeSpec flat = PdeSpec::parse({"x", "y"}, 1, {{"0"}}, Box::cube(2, -1, 1));
  auto na = theorem2_check(flat, Vector::Zero(2), {2});
  CHECK_FALSE(na.applicable);
  CHECK(na.verdict_name() == "NotApplicable");
  CHECK(na.to_csv().find("NotApplicable") != std::string::npos);
}

TEST_CASE("pde certificate with m = 1 agrees with the ode certificate") {
  struct Case {
    const char* f;
    Vector xi;
  };
  for (const auto& cs : {Case{"-y", Vector{{0.2, 0.3}}}, Case{"abs(y)^(2/3)", Vector{{0.0, 0.0}}},
                         Case{"y*t + 1", Vector{{0.1, 0.4}}}}) {
    CAPTURE(cs.f);
    OdeSpec ode = OdeSpec::parse({"t", "y"}, {cs.f}, Box::cube(2, -1, 1));
    PdeSpec pde = PdeSpec::parse({"t", "y"}, 1, {{cs.f}}, Box::cube(2, -1, 1));
    auto c1 = theorem1_check(ode, cs.xi);
    // The ode certificate drops coordinate c1.index; in F̂ = [1 | F] y is column 1, t column 2.
    const int keep = c1.index == 0 ? 1 : 2;
    auto c2 = theorem2_check(pde, cs.xi, {keep});
    CHECK(c2.applicable);
    CHECK(c2.verdict == c1.verdict);
  }
}

TEST_CASE("special form matches the PDE it induces") {
  CHECK(special_form_mismatch(example2_special(0.8, 0.4), example2(0.8, 0.4)) <= 1e-12);
  CHECK_THROWS_AS(SpecialFormSpec::parse({"x"}, {"y"}, {"x*y"}, {"x"}, Box::cube(2, 0, 1)), DomainError);
}

TEST_CASE("special solve") {
  SpecialFormSpec lin = SpecialFormSpec::parse({"x1", "x2"}, {"y"}, {"1"}, {"x1 + x2"}, Box::cube(3, -5, 5));
  auto s = special_solve(lin, Vector{{0.0, 0.0}}, Vector{{0.5}}, {Vector{{0.3, 0.4}}, Vector{{-1.0, 0.2}}});
  CHECK(s.y[0][0] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(s.y[1][0] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(s.max_residual <= 1e-6);

  const double a = 0.8, b = 0.4;
  SpecialFormSpec sf = example2_special(a, b);
  const Vector x0{{0.5, 0.5}}, y0{{0.4, 0.7}};
  std::vector<Vector> targets;
  for (double u : {0.1, 0.35, 0.6, 0.9})
    for (double v : {0.0, 0.5, 1.0}) targets.push_back(Vector{{u, v}});
  auto r = special_solve(sf, x0, y0, targets);
  CHECK(r.max_residual <= 1e-6);
  for (std::size_t k = 0; k < targets.size(); ++k)
    CHECK((r.y[k] - example2_exact(a, b, x0, y0, targets[k])).cwiseAbs().maxCoeff() <= 1e-9);

  // y0 on the equilibrium G = 0.
  auto eq = special_solve(sf, x0, Vector{{1.0, 0.7}}, {Vector{{0.9, 0.9}}});
  CHECK(eq.y[0][0] == 1.0);

  // ∫_1^y ds/√s = 2√y − 2 reaches at most −2 before G vanishes at 0.
  SpecialFormSpec root = SpecialFormSpec::parse({"x"}, {"y"}, {"sqrt(abs(y))"}, {"3*x"}, Box::cube(2, -2, 2));
  CHECK(special_solve(root, Vector{{0.0}}, Vector{{1.0}}, {Vector{{-0.5}}}).y[0][0] == doctest::Approx(0.0625));
  CHECK_THROWS_AS(special_solve(root, Vector{{0.0}}, Vector{{1.0}}, {Vector{{-1.0}}}), BranchCrossingError);
}

TEST_CASE("mollified special-form frames") {
  const Box region(Vector{{0.3, 0.3, 0.3, 0.3}}, Vector{{0.7, 0.7, 0.7, 0.7}});
  auto fr = involutive_mollified_frames(example2_special(0.8, 0.4), {0.25, 0.125}, region, 3);
  CHECK(fr.involutive());
  for (double w : fr.wedge) CHECK(w <= 1e-10);

  // G ≡ 1 and quadratic H: mollification changes nothing the frames can see.
  SpecialFormSpec smooth =
      SpecialFormSpec::parse({"x1", "x2"}, {"y"}, {"1"}, {"x1^2 + x1*x2"}, Box::cube(3, -1, 1));
  MollifiedSpecialForm a(smooth, 0.2), b(smooth, 0.05);
  const Vector p{{0.3, -0.2, 0.1}};
  CHECK((a.coefficients(p) - b.coefficients(p)).norm() <= 1e-9);
  CHECK((a.coefficients(p) - (Matrix(1, 2) << 0.4, 0.3).finished()).norm() <= 1e-9);

  // A random non-polynomial instance is still strongly involutive.
  SpecialFormSpec rnd = SpecialFormSpec::parse({"x1", "x2"}, {"y1", "y2"}, {"sin(y1) + 2", "exp(-y2^2)"},
                                               {"cos(x1*x2)", "x1^3 - x2"}, Box::cube(4, -1, 1));
  auto fr2 = involutive_mollified_frames(rnd, {0.3}, Box::cube(4, -0.5, 0.5), 3);
  CHECK(fr2.wedge[0] <= 1e-10);
  // The mollified coefficients approach the induced ones.
  const PdeSpec ind = rnd.induced();
  const Vector q{{0.2, -0.1, 0.3, 0.4}};
  MollifiedSpecialForm fine(rnd, 0.02);
  const Matrix c = fine.coefficients(q);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(c(i, j) == doctest::Approx(ind.F[i][j].eval(q)).epsilon(1e-3));
}

TEST_CASE("mollified surface tracks the closed form") {
  const double a = 0.8, b = 0.4;
  auto d = std::make_shared<MollifiedSpecialForm>(example2_special(a, b), 1.0 / 32);
  const Vector x0{{0.5, 0.5}}, y0{{0.4, 0.7}};
  Vector p0(4);
  p0 << x0, y0;
  FlowConfig cfg;
  cfg.h = 0.1 / 16;
  SurfacePatch s = build_surface(d, p0, 0.1, 5, cfg);
  double worst = 0.0;
  for (const auto& p : s.points) worst = std::max(worst, (p.tail(2) - example2_exact(a, b, x0, y0, p.head(2))).cwiseAbs().maxCoeff());
  CHECK(worst <= 1e-3);
}
