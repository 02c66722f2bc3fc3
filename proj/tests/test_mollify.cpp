#include "doctest.h"
#include "frob/mollify.hpp"

#include <cmath>
#include <sstream>

using namespace frob;

namespace {

GridFunction line(double lo, double hi, int n, const std::function<double(double)>& f) {
  return GridFunction::sample({lo}, {(hi - lo) / (n - 1)}, {n}, [&](const Vector& p) { return f(p[0]); });
}

double mass(const GridFunction& k) {
  double cell = 1.0, s = 0.0;
  for (double h : k.spacing()) cell *= h;
  for (double v : k.values()) s += v;
  return s * cell;
}

}  // namespace

TEST_CASE("kernel normalization and support") {
  GridFunction k1 = kernel(0.1, 1);
  CHECK(std::abs(mass(k1) - 1) < 1e-8);
  const auto& v = k1.values();
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(v[v.size() - 1 - i]).epsilon(1e-15));
  CHECK(v.front() == 0.0);  // |y| = ε lands on the support boundary
  CHECK(bump(0.01, 0.1) == 0.0);

  GridFunction k2 = kernel(0.1, 2);
  CHECK(std::abs(mass(k2) - 1) < 1e-8);
  const int n = k2.count()[0];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CHECK(k2.values()[k2.flat({i, j})] == doctest::Approx(k2.values()[k2.flat({j, i})]).epsilon(1e-15));
      CHECK(k2.values()[k2.flat({i, j})] == doctest::Approx(k2.values()[k2.flat({n - 1 - i, j})]).epsilon(1e-15));
    }
  CHECK_THROWS_AS(kernel(0.1, 1, 0.02), ResolutionError);
}

TEST_CASE("mollify preserves constants and linear functions") {
  GridFunction c = line(-1, 1, 801, [](double) { return 2.5; });
  GridFunction mc = mollify(c, 0.1);
  GridFunction x = line(-1, 1, 801, [](double t) { return t; });
  GridFunction mx = mollify(x, 0.1);
  int valid = 0;
  for (std::size_t k = 0; k < mc.size(); ++k) {
    if (!mc.is_valid(mc.unflat(k))) {
      CHECK(std::isnan(mc.values()[k]));
      continue;
    }
    ++valid;
    CHECK(std::abs(mc.values()[k] - 2.5) < 1e-8);
    CHECK(std::abs(mx.values()[k] - x.values()[k]) < 1e-6);
  }
  CHECK(valid == 801 - 2 * 40);
  CHECK_THROWS_AS(mollify(c, 1.0), MarginError);
}

TEST_CASE("mollified |x| deviates most at the kink") {
  GridFunction f = line(-1, 1, 2001, [](double t) { return std::abs(t); });
  GridFunction g = mollify(f, 0.1);
  double worst = 0.0, at = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_valid(g.unflat(k))) continue;
    const double d = std::abs(g.values()[k] - f.values()[k]);
    if (d > worst) {
      worst = d;
      at = g.point(k)[0];
    }
  }
  CHECK(std::abs(at) < 1e-12);
  CHECK(worst <= 0.1);
  // Independent quadrature of ∫φ_ε(y)|y|dy with the continuous kernel.
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double y = -0.1 + (i + 0.5) * 0.2 / 200000;
    num += bump(y * y, 0.1) * std::abs(y);
    den += bump(y * y, 0.1);
  }
  CHECK(worst == doctest::Approx(num / den).epsilon(1e-4));
}

TEST_CASE("smoothing converges as eps shrinks") {
  GridFunction f = line(-1, 1, 4001, [](double t) { return std::sqrt(std::abs(t)); });
  double prev = 1e9;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    GridFunction g = mollify(f, eps);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (g.is_valid(g.unflat(k))) worst = std::max(worst, std::abs(g.values()[k] - f.values()[k]));
    CHECK(worst <= prev * 1.05);
    prev = worst;
  }
}

TEST_CASE("verify_bounds on Lipschitz and Hoelder data") {
  GridFunction f = line(-1, 1, 4001, [](double t) { return std::abs(t); });
  auto reps = verify_bounds(f, Modulus::lipschitz(1), {}, {0.1, 0.05, 0.025});
  REQUIRE(reps.size() == 3);
  for (const auto& r : reps) {
    CHECK(r.deriv_sup[0] <= 1.0 + 1e-9);
    CHECK(r.deriv_integral[0] == doctest::Approx(0.5));
    CHECK(r.fitted_K <= r.overall_K);
  }
  for (std::size_t i = 1; i < reps.size(); ++i) CHECK(reps[i].fitted_K / reps[i - 1].fitted_K < 2.0);
  for (std::size_t i = 1; i < reps.size(); ++i) CHECK(reps[i].fitted_K / reps[i - 1].fitted_K > 0.5);

  GridFunction s = line(-1, 1, 8001, [](double t) { return std::sqrt(std::abs(t)); });
  auto hs = verify_bounds(s, Modulus::hoelder(0.5), {}, {0.1, 0.05, 0.025});
  std::vector<double> lx, ly;
  for (const auto& r : hs) {
    lx.push_back(std::log(r.eps));
    ly.push_back(std::log(r.deriv_sup[0]));
  }
  CHECK(std::abs(fit_line(lx, ly).slope + 0.5) <= 0.1);

  GridFunction c = line(-1, 1, 801, [](double) { return 1.0; });
  auto cs = verify_bounds(c, Modulus::lipschitz(1), {}, {0.1});
  CHECK(cs[0].sup_dist < 1e-12);
  CHECK_THROWS_AS(verify_bounds(c, Modulus::lipschitz(1), {}, {0.01}), ResolutionError);
}

TEST_CASE("grid IO round-trips") {
  GridFunction g = GridFunction::sample({0.0, -1.0}, {0.1, 0.25}, {11, 9}, [](const Vector& p) { return p[0] * p[1] + 1 / 3.0; });
  g.set_valid({1, 1}, {9, 7});
  std::stringstream bin;
  g.write_binary(bin);
  GridFunction b = GridFunction::read_binary(bin);
  std::stringstream csv;
  g.write_csv(csv);
  GridFunction c = GridFunction::read_csv(csv);
  for (const GridFunction* h : {&b, &c}) {
    CHECK(h->count() == g.count());
    CHECK(h->valid_lo() == g.valid_lo());
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::isnan(g.values()[k])) CHECK(std::isnan(h->values()[k]));
      else CHECK(h->values()[k] == g.values()[k]);
    }
  }
  std::stringstream junk("XXXX");
  CHECK_THROWS_AS(GridFunction::read_binary(junk), ParseError);
}

TEST_CASE("point mollifier matches analytic moments") {
  PointMollifier pm(2, 0.2, 12);
  auto quad = [](const Vector& p) { return p[0] * p[0] + 3 * p[0] * p[1] - p[1]; };
  auto j = pm.jet(quad, Vector{{0.3, -0.4}});
  // Mollifying a quadratic shifts it by a constant (the second moment) only.
  auto j0 = pm.jet(quad, Vector{{0.0, 0.0}});
  CHECK(j.grad[0] == doctest::Approx(2 * 0.3 + 3 * -0.4).epsilon(1e-9));
  CHECK(j.grad[1] == doctest::Approx(3 * 0.3 - 1).epsilon(1e-9));
  CHECK(j.hess(0, 0) == doctest::Approx(2).epsilon(1e-8));
  CHECK(j.hess(0, 1) == doctest::Approx(3).epsilon(1e-8));
  CHECK(j.hess(1, 1) == doctest::Approx(0).scale(1));
  CHECK(j.value - quad(Vector{{0.3, -0.4}}) == doctest::Approx(j0.value).epsilon(1e-9));
  CHECK(pm.value([](const Vector&) { return 7.0; }, Vector{{1.0, 2.0}}) == doctest::Approx(7.0).epsilon(1e-14));
}
