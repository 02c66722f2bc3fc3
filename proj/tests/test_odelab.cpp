#include "doctest.h"
#include "frob/odelab.hpp"

#include <cmath>

using namespace frob;

TEST_CASE("extended field") {
  OdeSpec zero = OdeSpec::parse({"t", "a", "b"}, {"0", "0"}, Box::cube(3, -1, 1));
  ExprVector e = extend(zero);
  CHECK(e.size() == 3);
  CHECK(e[0].constant_value() == 1.0);
  CHECK(e[1].is_zero());

  OdeSpec lin = OdeSpec::parse({"t", "y"}, {"y"}, Box::cube(2, -1, 1));
  CHECK(extend(lin).eval(Vector{{0.3, 0.7}}) == Vector{{1.0, 0.7}});

  // paper-ex1 against a hand-written evaluation.
  OdeSpec ex = example1(0.9, 0.5, 0.5, 0.5);
  const Vector p{{0.3, 0.2, 0.6}};
  const Vector v = extend(ex).eval(p);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(-0.3 * std::log(std::pow(0.3, 0.5)) - 0.2 * std::log(std::pow(0.2, 0.5))));
  CHECK(v[2] == doctest::Approx(1 + std::pow(0.6, 0.9) - 0.2 * std::log(std::pow(0.2, 0.5))));
  CHECK(extend(ex).eval(Vector::Zero(3)) == Vector{{1.0, 0.0, 1.0}});
}

TEST_CASE("paper-ex1 certificate") {
  OdeSpec ex = example1(0.9, 0.5, 0.5, 0.5);
  auto c = theorem1_check(ex, Vector::Zero(3));
  CHECK(c.index == 2);
  CHECK(c.w1_declared);
  CHECK(c.w2_declared);
  CHECK(c.verdict == Verdict::Holds);
  CHECK(c.report.fitted_slope(1e-8, 1e-3) == doctest::Approx(0.4).epsilon(0.05 / 0.4));
  CHECK(c.to_csv(ex.F.names()).find("index=y") != std::string::npos);
  // The declared Hoelder/LogLip moduli are not contradicted by the data.
  CHECK(declared_moduli_ratio(ex) <= 2.0);
}

TEST_CASE("Lipschitz fields hold with estimated moduli") {
  for (const char* f : {"-y", "sin(t) + 0.5*y", "y*t"}) {
    OdeSpec s = OdeSpec::parse({"t", "y"}, {f}, Box::cube(2, -1, 1));
    CAPTURE(f);
    CHECK(theorem1_check(s, Vector{{0.2, 0.3}}).verdict == Verdict::Holds);
  }
}

TEST_CASE("Peano field fails") {
  OdeSpec p = peano();
  auto c = theorem1_check(p, Vector::Zero(2));
  CHECK(c.index == 0);
  CHECK(c.verdict == Verdict::Fails);
  CHECK(declared_moduli_ratio(p) <= 2.0);
}

TEST_CASE("funnel on a contraction") {
  OdeSpec s = OdeSpec::parse({"t", "y"}, {"-y"}, Box(Vector{{0.0, -2.0}}, Vector{{2.0, 2.0}}));
  FunnelConfig cfg;
  cfg.T = 1.0;
  cfg.flow.h = 1e-2;
  auto r = funnel(s, Vector{{0.0, 1.0}}, cfg);
  CHECK(r.verdict == FunnelVerdict::UniqueLike);
  CHECK(r.exponent == doctest::Approx(1.0).epsilon(0.02));
  for (std::size_t k = 1; k < r.dispersion.size(); ++k) CHECK(r.dispersion[k] <= r.dispersion[k - 1]);
  auto again = funnel(s, Vector{{0.0, 1.0}}, cfg);
  CHECK(again.to_csv() == r.to_csv());
  cfg.deltas = {1e-3, 1e-2};
  CHECK_THROWS_AS(funnel(s, Vector{{0.0, 1.0}}, cfg), DomainError);
}

TEST_CASE("Peano funnel") {
  FunnelConfig cfg;
  cfg.T = 1.0;
  cfg.flow.h = 1e-3;
  cfg.initial_probe = false;
  cfg.deltas = {1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  auto r = funnel(peano(), Vector::Zero(2), cfg);
  CHECK(r.verdict == FunnelVerdict::FunnelDetected);
  const double envelope = std::pow(1.0 / 3.0, 3);
  CHECK(r.dispersion.back() >= envelope / 3);
  CHECK(r.dispersion.back() <= envelope * 3);
}

TEST_CASE("paper-ex1 funnel is unique-like") {
  FunnelConfig cfg;
  cfg.T = 0.5;
  cfg.flow.h = 1e-3;
  cfg.deltas = {1e-3, 1e-4, 1e-5, 1e-6};
  auto r = funnel(example1(0.9, 0.5, 0.5, 0.5), Vector::Zero(3), cfg);
  CHECK(r.verdict == FunnelVerdict::UniqueLike);
}

TEST_CASE("estimated moduli reach the same verdicts") {
  OdeSpec p = peano();
  p.moduli.clear();
  auto c = theorem1_check(p, Vector::Zero(2));
  CHECK_FALSE(c.w2_declared);
  CHECK(c.w2.kind() == ModulusKind::Hoelder);
  CHECK(c.w2.param(1) == doctest::Approx(2.0 / 3.0).epsilon(0.1));
  CHECK(c.verdict == Verdict::Fails);

  OdeSpec flat = OdeSpec::parse({"t", "y"}, {"2"}, Box::cube(2, -1, 1));
  CHECK(theorem1_check(flat, Vector::Zero(2)).verdict == Verdict::Holds);
}
