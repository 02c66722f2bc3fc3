#include "doctest.h"
#include "frob/moduli.hpp"

#include <cmath>
#include <random>

using namespace frob;

TEST_CASE("eval examples") {
  CHECK(Modulus::lipschitz(2).eval(0.5) == doctest::Approx(1.0));
  CHECK(Modulus::loglip(1, 1).eval(std::exp(-1.0)) == doctest::Approx(std::exp(-1.0)));
  CHECK(Modulus::hoelder(0.5, 1).eval(0.25) == doctest::Approx(0.5));
  CHECK(Modulus::loglip(1, 1).eval(0.0) == 0.0);
  CHECK(Modulus::loglip(1, 1).domain_cap() == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(Modulus::lipschitz(1).eval(1.5), DomainError);
  CHECK_THROWS_AS(Modulus::lipschitz(1).eval(-0.1), DomainError);
}

TEST_CASE("monotone on the probe grid") {
  std::vector<Modulus> ws{Modulus::lipschitz(2), Modulus::hoelder(0.3, 1.5), Modulus::loglip(0.7, 2),
                          Modulus::sum(Modulus::lipschitz(1), Modulus::hoelder(0.5)),
                          Modulus::max(Modulus::lipschitz(3), Modulus::hoelder(0.5)),
                          Modulus::tabulated({{0.1, 0.2}, {0.5, 0.3}, {1.0, 0.9}})};
  for (const auto& w : ws) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 40; ++k) {
      const double v = w.eval(w.domain_cap() * std::ldexp(1.0, -k));
      CHECK(v >= 0);
      CHECK(v <= prev);
      prev = v;
    }
    CHECK(w.eval(0) == 0.0);
  }
}

TEST_CASE("tabulated validation") {
  CHECK_THROWS_AS(Modulus::tabulated({{0.2, 1}, {0.1, 2}}), DomainError);
  CHECK_THROWS_AS(Modulus::tabulated({{0.1, 2}, {0.2, 1}}), DomainError);
  Modulus t = Modulus::tabulated({{0.1, 0.2}, {0.3, 0.6}});
  CHECK(t.eval(0.05) == doctest::Approx(0.1));
  CHECK(t.eval(0.2) == doctest::Approx(0.4));
}

TEST_CASE("algebra") {
  Modulus s = algebra_sum(Modulus::lipschitz(1), Modulus::hoelder(0.5, 1));
  CHECK(s.eval(0.25) == doctest::Approx(0.75));
  CHECK(algebra_sum(Modulus::hoelder(0.5, 1), Modulus::lipschitz(1)).eval(0.25) == s.eval(0.25));
  Modulus p = algebra_product(Modulus::lipschitz(1), Modulus::lipschitz(1), 3);
  CHECK(p.kind() == ModulusKind::Scale);
  CHECK(p.param(0) == 3);
  CHECK(p.eval(0.1) == doctest::Approx(0.6));
  Modulus q = algebra_quotient(Modulus::lipschitz(1), Modulus::lipschitz(1), 1, 0.5);
  CHECK(q.eval(0.1) == doctest::Approx(0.1 + 4 * 0.1));
  CHECK_THROWS_AS(algebra_quotient(Modulus::lipschitz(1), Modulus::lipschitz(1), 1, 0), DomainError);
}

TEST_CASE("serialization round-trips") {
  Modulus w = Modulus::scale(3, Modulus::sum(Modulus::loglip(0.5, 2), Modulus::max(Modulus::hoelder(0.25), Modulus::tabulated({{0.01, 0.1}, {1, 2}}))));
  Modulus back = Modulus::parse(w.serialize());
  CHECK(back.serialize() == w.serialize());
  for (double s : {0.001, 0.01, 0.2}) CHECK(back.eval(s) == w.eval(s));
  CHECK(Modulus::parse("hoelder(alpha=0.5)").eval(0.25) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Modulus::parse("bogus(K=1)"), ParseError);
}

TEST_CASE("osgood examples") {
  CHECK(osgood_check(Modulus::lipschitz(1), 0.5, 40).verdict == Verdict::Holds);
  CHECK(osgood_check(Modulus::hoelder(0.5, 1), 0.5, 40).verdict == Verdict::Fails);
  auto r = osgood_check(Modulus::loglip(1, 1), 0.25, 40);
  CHECK(r.verdict == Verdict::Holds);
  // ∫_δ^ε ds/(−s log s) = log|log δ| − log|log ε|.
  for (const auto& t : r.trace) {
    const double exact = std::log(-std::log(t.scale)) - std::log(-std::log(0.25));
    CHECK(t.value == doctest::Approx(exact).epsilon(1e-9));
  }
  CHECK_THROWS_AS(osgood_check(Modulus::lipschitz(1), 0.5, 4), DomainError);
  CHECK_THROWS_AS(osgood_check(Modulus::tabulated({{0.1, 0.0}, {0.5, 0.0}}), 0.5, 10), SingularIntegrandError);
}

TEST_CASE("limit condition examples") {
  auto ex1 = limit_condition_check(Modulus::hoelder(0.9, 1), Modulus::loglip(0.5, 1));
  CHECK(ex1.verdict == Verdict::Holds);
  CHECK(ex1.fitted_slope(1e-8, 1e-3) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(limit_condition_check(Modulus::lipschitz(1), Modulus::lipschitz(1)).verdict == Verdict::Holds);
  auto bad = limit_condition_check(Modulus::hoelder(0.5, 1), Modulus::hoelder(0.5, 1));
  CHECK(bad.verdict == Verdict::Fails);
  // Independent evaluation of the trace below 1e-2: log q = 0.5 log s + s^{-1/2} increases.
  double prev = -1e300;
  for (auto it = bad.trace.begin(); it != bad.trace.end(); ++it)
    if (it->scale < 1e-2) {
      const double lq = 0.5 * std::log(it->scale) + 1 / std::sqrt(it->scale);
      CHECK(it->log_value == doctest::Approx(lq));
      CHECK(lq > prev);
      prev = lq;
    }
}

TEST_CASE("limit condition is invariant under scaling w1") {
  for (double c : {0.01, 3.0, 1e4}) {
    auto a = limit_condition_check(Modulus::hoelder(0.9), Modulus::loglip(0.5));
    auto b = limit_condition_check(Modulus::scale(c, Modulus::hoelder(0.9)), Modulus::loglip(0.5));
    CHECK(a.verdict == b.verdict);
    auto f1 = limit_condition_check(Modulus::hoelder(0.5), Modulus::hoelder(0.5));
    auto f2 = limit_condition_check(Modulus::scale(c, Modulus::hoelder(0.5)), Modulus::hoelder(0.5));
    CHECK(f1.verdict == f2.verdict);
  }
}

TEST_CASE("report CSV has a verdict header") {
  auto r = limit_condition_check(Modulus::lipschitz(1), Modulus::lipschitz(1));
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("# criterion=LimitCondition verdict=Holds", 0) == 0);
  CHECK(csv.find("decay_factor") != std::string::npos);
}

TEST_CASE("estimate_modulus") {
  std::vector<Sample> lin, sq;
  for (int i = 0; i <= 200; ++i) {
    const double x = i / 200.0;
    lin.push_back({Vector::Constant(1, x), 3 * x});
    sq.push_back({Vector::Constant(1, x), std::sqrt(x)});
  }
  Modulus w = estimate_modulus(lin, 1);
  for (const auto& [s, v] : w.breakpoints()) CHECK(v == doctest::Approx(3 * s).epsilon(1e-9));

  Modulus h = estimate_modulus(sq, 1);
  for (const auto& [s, v] : h.breakpoints()) CHECK(std::abs(v / std::sqrt(s) - 1) <= 0.1);

  std::vector<Sample> plane;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) plane.push_back({Vector{{i / 10.0, j / 10.0}}, j / 10.0});
  Modulus z = estimate_modulus(plane, 1);  // mask = {x}
  for (const auto& [s, v] : z.breakpoints()) CHECK(v == 0.0);

  std::vector<Sample> few(lin.begin(), lin.begin() + 50);
  CHECK_THROWS_AS(estimate_modulus(few, 1), InsufficientDataError);
}

TEST_CASE("closed-form envelope of tabulated data") {
  std::vector<std::pair<double, double>> lin, hol;
  for (double s = 0.01; s < 1; s *= 1.5) {
    lin.emplace_back(s, 3 * s);
    hol.emplace_back(s, std::sqrt(s));
  }
  Modulus a = fit_closed_form(Modulus::tabulated(lin));
  CHECK(a.kind() == ModulusKind::Lipschitz);
  CHECK(a(0.5) == doctest::Approx(1.5));
  Modulus b = fit_closed_form(Modulus::tabulated(hol));
  CHECK(b.kind() == ModulusKind::Hoelder);
  CHECK(b.param(1) == doctest::Approx(0.5));
  for (const auto& [s, v] : hol) CHECK(b(s) >= v * (1 - 1e-12));
  CHECK(fit_closed_form(Modulus::hoelder(0.3)).serialize() == Modulus::hoelder(0.3).serialize());
}
