#include "doctest.h"
#include "frob/geometry.hpp"

#include <cmath>
#include <random>

using namespace frob;

namespace {

const std::vector<std::string> kXYZ{"x", "y", "z"};

FrameSection frame_of(const std::string& form, const std::vector<std::string>& names = kXYZ) {
  return FrameSection(names, {parse_one_form(form, names)});
}

Distribution contact() { return Distribution::parse(kXYZ, 2, {{"y"}, {"0"}}, Box::cube(3, -1, 1)); }
Distribution involutive() { return Distribution::parse(kXYZ, 2, {{"x"}, {"0"}}, Box::cube(3, -1, 1)); }

}  // namespace

TEST_CASE("annihilator frame examples") {
  Distribution d1 = Distribution::parse({"x", "y"}, 1, {{"y"}}, Box::cube(2, -1, 1));
  FrameSection f1 = annihilator_frame(d1);
  CHECK(f1.str() == "eta1 = (-y)*dx + dy\n");
  Vector p{{0.3, 0.7}};
  CHECK((f1.values(p) * d1.field(0, p)).norm() == 0.0);

  FrameSection f2 = annihilator_frame(contact());
  CHECK(f2.forms()[0][1].str(kXYZ) == "-y");
  CHECK(f2.forms()[0][2].is_zero());

  Distribution flat = Distribution::parse({"x", "y1", "y2"}, 1, {{"0", "0"}}, Box::cube(3, -1, 1));
  FrameSection f3 = annihilator_frame(flat);
  CHECK(f3.values(Vector::Zero(3)) == (Matrix(2, 3) << 0, 1, 0, 0, 0, 1).finished());
}

TEST_CASE("annihilation is exact on a million random points") {
  Distribution d = Distribution::parse({"x1", "x2", "y1", "y2"}, 2,
                                       {{"y1*x2 + sin(y2)", "x1^2"}, {"exp(-y1)", "y1*y2 - x1"}}, Box::cube(4, -1, 1));
  auto cof = annihilator_coframe(std::make_shared<Distribution>(d));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  Vector p(4);
  for (int s = 0; s < 1000000; ++s) {
    for (int i = 0; i < 4; ++i) p[i] = u(rng);
    worst = std::max(worst, (cof->values(p) * d.spanning(p)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("symbolic and numeric annihilators agree") {
  Distribution d = Distribution::parse({"x1", "x2", "y1", "y2"}, 2,
                                       {{"y1*x2 + sin(y2)", "x1^2"}, {"exp(-y1)", "y1*y2 - x1"}}, Box::cube(4, -1, 1));
  FrameSection sym = annihilator_frame(d);
  auto num = annihilator_coframe(std::make_shared<Distribution>(d));
  Vector p{{0.2, -0.3, 0.5, 0.1}};
  CHECK((sym.values(p) - num->values(p)).norm() < 1e-15);
  auto a = sym.differentials(p), b = num->differentials(p);
  for (int j = 0; j < 2; ++j) CHECK((a[j] - b[j]).norm() < 1e-14);
  CHECK(frobenius_defect(sym, p) == doctest::Approx(frobenius_defect(*num, p)).epsilon(1e-12));
}

TEST_CASE("Frobenius defect examples") {
  CHECK(frobenius_defect(frame_of("dy - x*dx", {"x", "y"}), Vector{{0.4, 0.2}}) == 0.0);
  FrameSection c = frame_of("dz - y*dx");
  FrameSection inv = frame_of("dz - x*dx");
  auto pts = lattice(Box::cube(3, -2, 2), 5);
  for (double v : frobenius_defect(c, pts)) CHECK(std::abs(v - 1.0) <= 1e-10);
  for (double v : frobenius_defect(inv, pts)) CHECK(std::abs(v) <= 1e-10);
  auto w = frobenius_wedges(c);
  CHECK(w[0][1 | 2 | 4].constant_value() == 1.0);
  CHECK(frobenius_wedges(inv)[0].is_zero());
}

TEST_CASE("defect zero set is invariant under rescaling") {
  const Expr scale = parse_expr("2 + sin(x*y) + z^2", kXYZ);
  auto pts = lattice(Box::cube(3, -1, 1), 5);
  for (const char* form : {"dz - y*dx", "dz - x*dx", "dz - x*y*dy", "dz - z*dx"}) {
    FrameSection f = frame_of(form);
    FrameSection g = f.scaled(scale);
    auto a = frobenius_defect(f, pts), b = frobenius_defect(g, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((a[i] <= 1e-12) == (b[i] <= 1e-12));
  }
}

TEST_CASE("restricted inverse") {
  Distribution d = contact();
  auto r = restricted_inverse(annihilator_frame(d), Vector{{0.1, 0.2, 0.3}});
  CHECK(r.norm == doctest::Approx(1.0));
  CHECK(r.map(2, 0) == doctest::Approx(1.0));
  auto r2 = restricted_inverse(annihilator_frame(d).scaled(Expr(2.0)), Vector{{0.1, 0.2, 0.3}});
  CHECK(r2.norm == doctest::Approx(0.5));
  const double e = 1e-3;
  FrameSection diag({"x", "y1", "y2"}, {parse_one_form("dy1", {"x", "y1", "y2"}), parse_one_form("0.001*dy2", {"x", "y1", "y2"})});
  CHECK(restricted_inverse(diag, Vector::Zero(3)).norm == doctest::Approx(1 / e));
  CHECK_THROWS_AS(restricted_inverse(frame_of("dx"), Vector::Zero(3)), TransversalityError);
}

TEST_CASE("involutivity constant") {
  SamplingProtocol proto;
  proto.lattice = 5;
  auto inv = std::make_shared<Distribution>(involutive());
  auto con = std::make_shared<Distribution>(contact());
  const Box region = Box::cube(3, -1, 1);
  CHECK(involutivity_constant(annihilator_frame(*inv), plane_field(inv), region, proto).value == 0.0);
  // dη = dx∧dy never sees ∂z = A⁻¹w, so the contact constant is zero.
  CHECK(involutivity_constant(annihilator_frame(*con), plane_field(con), region, proto).value <= 1e-15);

  // η = dy − c·y dx: dη(∂y, v) = −c·v_x and |v_x| ≤ 1 with equality at y = 0.
  for (double c : {0.5, 2.0, -3.0}) {
    auto d = std::make_shared<Distribution>(
        Distribution({"x", "y"}, 1, {{Expr(c) * Expr::var(1)}}, Box::cube(2, -1, 1)));
    const double m = involutivity_constant(annihilator_frame(*d), plane_field(d), Box::cube(2, -1, 1), proto).value;
    CHECK(m == doctest::Approx(std::abs(c)).epsilon(1e-12));
  }
}

TEST_CASE("involutivity constant is scale invariant and monotone in n_dirs") {
  Distribution d = Distribution::parse({"x1", "x2", "y1", "y2"}, 2,
                                       {{"y1*x2 + y2^2", "x1*y1"}, {"y2 - x1", "y1*y2"}}, Box::cube(4, -0.5, 0.5));
  auto dp = std::make_shared<Distribution>(d);
  FrameSection f = annihilator_frame(d);
  const Box region = Box::cube(4, -0.5, 0.5);
  SamplingProtocol proto;
  proto.lattice = 3;
  double prev = 0.0;
  for (int dirs : {1, 4, 16, 64}) {
    proto.n_dirs = dirs;
    const double m = involutivity_constant(f, plane_field(dp), region, proto).value;
    CHECK(m >= prev);
    prev = m;
  }
  proto.n_dirs = 16;
  const double base = involutivity_constant(f, plane_field(dp), region, proto).value;
  for (double c : {3.0, -0.25}) {
    const double scaled = involutivity_constant(f.scaled(Expr(c)), plane_field(dp), region, proto).value;
    CHECK(std::abs(scaled - base) <= 1e-12 * std::max(1.0, base));
  }
}

TEST_CASE("bilinear sup matches brute force") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<Matrix> ms(2, Matrix(2, 2));
  for (auto& m : ms)
    for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = g(rng);
  double brute = 0.0;
  for (int i = 0; i < 2000; ++i)
    for (int j = 0; j < 200; ++j) {
      const double ta = M_PI * i / 2000, tb = 2 * M_PI * j / 200;
      Vector a{{std::cos(ta), std::sin(ta)}}, b{{std::cos(tb), std::sin(tb)}};
      brute = std::max(brute, std::hypot(a.dot(ms[0] * b), a.dot(ms[1] * b)));
    }
  const double est = bilinear_sup(ms, 64, 3, 1);
  CHECK(est >= brute * (1 - 1e-3));
  CHECK(est <= brute * (1 + 1e-3));
}

TEST_CASE("traces") {
  SamplingProtocol proto;
  proto.lattice = 5;
  const Box region = Box::cube(3, -1, 1);
  auto inv = std::make_shared<Distribution>(involutive());
  auto con = std::make_shared<Distribution>(contact());
  CoframePtr fi = std::make_shared<FrameSection>(annihilator_frame(*inv));
  CoframePtr fc = std::make_shared<FrameSection>(annihilator_frame(*con));

  auto ti = asymptotic_involutivity_trace({fi, fi, fi}, {plane_field(inv), plane_field(inv), plane_field(inv)}, 1.0, region, proto);
  for (double q : ti.q) CHECK(q == 0.0);
  for (double s : ti.strong) CHECK(s == 0.0);

  auto tc = asymptotic_involutivity_trace({fc, fc, fc}, {plane_field(con), plane_field(con), plane_field(con)}, 1.0, region, proto);
  for (double q : tc.q) CHECK(q == doctest::Approx(1.0));
  CHECK(tc.q[0] == tc.q[2]);
  CHECK_THROWS_AS(asymptotic_involutivity_trace({fc}, {plane_field(inv)}, 1.0, region, proto), DomainError);
  CHECK_THROWS_AS(asymptotic_involutivity_trace({fc}, {}, 1.0, region, proto), DomainError);

  auto tr = exterior_regularity_trace({fc, fc}, plane_field(con), 1.0, region, proto, fc);
  for (double q : tr.q) CHECK(q <= 1e-15);
  for (double s : tr.strong) CHECK(s == 0.0);
  CHECK(tr.to_csv().find("k,q,strong") != std::string::npos);
}

TEST_CASE("compatibility of orthonormal frames") {
  // Two orthonormal bases of the annihilator of a fixed 1-plane in ℝ³.
  auto a1 = std::make_shared<FrameSection>(kXYZ, std::vector<OneForm>{parse_one_form("dy", kXYZ), parse_one_form("dz", kXYZ)});
  const double c = std::cos(0.7), s = std::sin(0.7);
  auto a2 = std::make_shared<FrameSection>(
      kXYZ, std::vector<OneForm>{parse_one_form(std::to_string(c) + "*dy + " + std::to_string(s) + "*dz", kXYZ),
                                 parse_one_form(std::to_string(-s) + "*dy + " + std::to_string(c) + "*dz", kXYZ)});
  CHECK(compatibility(*a1, *a2, Vector::Zero(3)) == doctest::Approx(1.0).epsilon(1e-6));
}
