#include "doctest.h"
#include "frob/dynsys.hpp"

#include <cmath>

using namespace frob;

namespace {

Matrix col(const Vector& v) { return Matrix(v); }

Matrix horizontal() { return col(Vector{{1.0, 0.0}}); }

Matrix skew_plane(const Vector& xy) {
  Matrix e = Matrix::Zero(3, 2);
  e.block(0, 0, 2, 1) = xy;
  e(2, 1) = 1.0;
  return e;
}

Matrix skew_expanding() {
  Matrix f = Matrix::Zero(3, 1);
  f.block(0, 0, 2, 1) = cat_expanding();
  return f;
}

}  // namespace

TEST_CASE("diffeo validation") {
  CHECK_NOTHROW(cat_map().validate(Box::cube(2, 0, 1)));
  CHECK_NOTHROW(skew_product().validate(Box::cube(3, 0, 1)));
  auto bad = DiffeoSpec::parse({"x", "y"}, {"2*x + y", "x + y"}, {"x", "y"}, true);
  CHECK_THROWS_AS(bad.validate(Box::cube(2, 0, 1)), DomainError);
  CHECK(cat_map().apply(Vector{{0.6, 0.7}}).isApprox(Vector{{0.9, 0.3}}, 1e-12));
  CHECK(cat_lambda_minus() * cat_lambda_plus() == doctest::Approx(1.0));
}

TEST_CASE("transport on the cat map") {
  const auto phi = cat_map();
  const auto e0 = constant_plane(horizontal());
  const auto f = constant_plane(col(cat_expanding()));
  const auto pts = lattice(Box::cube(2, 0, 1), 5);

  const auto t0 = transport(phi, e0, 0, pts, f);
  for (const auto& b : t0.bases) CHECK(subspace_angle(b, horizontal()) <= 1e-15);

  const auto t10 = transport(phi, e0, 10, pts, f);
  for (const auto& b : t10.bases) CHECK(subspace_angle(b, col(cat_contracting())) <= 1e-3);

  // E0 along the expanding direction sits inside the cone.
  CHECK_THROWS_AS(transport(phi, f, 3, pts, f), ConeError);
}

TEST_CASE("skew product transport") {
  const auto phi = skew_product();
  const auto f = constant_plane(skew_expanding());
  const auto pts = lattice(Box::cube(3, 0, 1), 4);

  // span{E^s, ∂θ} is already invariant.
  const auto inv = constant_plane(skew_plane(cat_contracting()));
  for (const auto& p : pts) CHECK(subspace_angle(transport_point(phi, inv, 8, p, f).basis, inv(p)) <= 1e-12);

  // From span{∂x, ∂θ} the angles between successive E^k shrink geometrically.
  const auto e0 = constant_plane(skew_plane(Vector{{1.0, 0.0}}));
  double prev = INFINITY;
  for (int k = 0; k <= 8; ++k) {
    double a = 0.0;
    for (const auto& p : pts)
      a = std::max(a, subspace_angle(transport_point(phi, e0, k, p, f).basis, transport_point(phi, e0, k + 1, p, f).basis));
    if (k > 0) CHECK(a <= prev / 2);
    prev = a;
  }
}

TEST_CASE("cocycle property") {
  for (const auto& [phi, e, box] :
       {std::tuple{cat_map(), horizontal(), Box::cube(2, 0, 1)},
        std::tuple{skew_product(), skew_plane(Vector{{1.0, 0.0}}), Box::cube(3, 0, 1)}}) {
    const auto e0 = constant_plane(e);
    for (auto [k1, k2] : {std::pair{2, 3}, std::pair{4, 1}, std::pair{0, 5}}) {
      const auto inner = transported_field(phi, e0, k2);
      for (const auto& p : lattice(box, 4)) {
        const Matrix direct = transport_point(phi, e0, k1 + k2, p).basis;
        const Matrix composed = transport_point(phi, inner, k1, p).basis;
        CHECK(subspace_angle(direct, composed) <= 1e-8);
      }
    }
  }
}

TEST_CASE("cat map domination rates") {
  const auto phi = cat_map();
  DominationConfig cfg;
  cfg.k_max = 15;
  const auto rep = domination_report(phi, constant_plane(col(cat_contracting())), constant_plane(col(cat_expanding())),
                                     lattice(Box::cube(2, 0, 1), 6), cfg);
  CHECK(rep.dominated);
  for (std::size_t i = 0; i < rep.k.size(); ++i) {
    const int k = rep.k[i];
    CHECK(rep.norm_E[i] == doctest::Approx(std::pow(cat_lambda_minus(), k)).epsilon(1e-6));
    CHECK(rep.conorm_F[i] == doctest::Approx(std::pow(cat_lambda_plus(), k)).epsilon(1e-9));
    CHECK(rep.conorm_F[i] <= rep.norm_F[i] * (1 + 1e-12));
    CHECK(rep.duality[i] <= 1e-10);
    if (k >= 5) {
      CHECK(std::pow(rep.norm_E[i], 1.0 / k) == doctest::Approx(cat_lambda_minus()).epsilon(0.05));
      CHECK(std::pow(rep.conorm_F[i], 1.0 / k) == doctest::Approx(cat_lambda_plus()).epsilon(0.05));
    }
    if (k >= 4)
      for (const auto& q : rep.q) CHECK(q[i] <= 0.2 * q[i - 1]);
  }
  CHECK(rep.cone_constant.back() > 0.1);
}

TEST_CASE("skew product grows at most linearly") {
  const auto rep = domination_report(skew_product(), constant_plane(skew_plane(cat_contracting())),
                                     constant_plane(skew_expanding()), lattice(Box::cube(3, 0, 1), 5),
                                     DominationConfig{15, {0.1, 0.5, 1.0}, {1}});
  CHECK(rep.dominated);
  CHECK(rep.fitted_C() <= 0.05);
  CHECK(rep.norm_E.back() <= 2.0);
  for (const auto& q : rep.q) CHECK(q.back() <= 1e-4 * q.front());
  for (double d : rep.duality) CHECK(d <= 1e-10);
}

TEST_CASE("identity is not dominated") {
  const auto rep = domination_report(identity_map(2), constant_plane(horizontal()),
                                     constant_plane(col(Vector{{0.0, 1.0}})), lattice(Box::cube(2, 0, 1), 3),
                                     DominationConfig{4, {1.0}, {}});
  CHECK_FALSE(rep.dominated);
  CHECK(rep.one_step_E == doctest::Approx(1.0));
  CHECK(rep.one_step_F == doctest::Approx(1.0));
}

TEST_CASE("pullback frames") {
  const auto phi = skew_product();
  const auto pts = lattice(Box::cube(3, 0, 1), 4);
  // Two orthonormal annihilators of span{∂x}, related by a rotation.
  Matrix c = Matrix::Zero(2, 3);
  c(0, 1) = 1;
  c(1, 2) = 1;
  const double th = 0.7;
  Matrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const auto a = constant_coframe(c), b = constant_coframe(rot * c);
  const auto fr = orthonormal_pullback_frames(phi, a, {0, 1, 3, 6}, pts, b, {1, 2});
  CHECK(fr.compared);
  CHECK(fr.compatibility_error <= 1e-8);
  for (const auto& p : pts) CHECK((fr.frames[0]->values(p) - c).norm() == 0.0);

  // Frames annihilate the transported plane.
  const auto e0 = constant_plane(skew_plane(Vector{{1.0, 0.0}}));
  Matrix dy = Matrix::Zero(1, 3);
  dy(0, 1) = 1;
  const auto c0 = constant_coframe(dy);
  const auto f6 = orthonormal_pullback_frames(phi, c0, {6}, pts);
  for (const auto& p : pts) {
    const Matrix v = f6.frames[0]->values(p);
    CHECK((v * transport_point(phi, e0, 6, p).basis).norm() <= 1e-8 * v.norm());
  }
  CHECK_THROWS_AS(orthonormal_pullback_frames(phi, constant_coframe(2 * c), {1}, pts), DomainError);

  // Cat map: the two unit covectors annihilating the horizontal.
  Matrix up(1, 2);
  up << 0, 1;
  const auto cat = orthonormal_pullback_frames(cat_map(), constant_coframe(up), {1, 5, 10},
                                               lattice(Box::cube(2, 0, 1), 5), constant_coframe(-up));
  CHECK(cat.compatibility_error <= 1e-8);
}

TEST_CASE("splitting pipeline") {
  PipelineConfig cfg;
  cfg.k_max = 8;
  cfg.lattice = 4;
  cfg.domination_lattice = 4;

  SUBCASE("cat map") {
    const auto tr = splitting_involutivity_pipeline(cat_map(), horizontal(), col(cat_expanding()),
                                                    Box::cube(2, 0, 1), cfg);
    CHECK(tr.applicable);
    const double ratio = cat_lambda_minus() / cat_lambda_plus();
    for (std::size_t e = 0; e < tr.eps.size(); ++e)
      for (std::size_t i = 2; i < tr.k.size(); ++i) {
        CHECK(tr.involutivity_bound[e][i] <= ratio * tr.involutivity_bound[e][i - 1]);
        CHECK(tr.regularity_bound[e][i] <= 1.1 * ratio * tr.regularity_bound[e][i - 1]);
        CHECK(tr.regularity[e][i] <= 1.1 * ratio * tr.regularity[e][i - 1]);
        // Pulled-back constant frames are closed.
        CHECK(tr.involutivity[e][i] == 0.0);
      }
  }
  SUBCASE("skew product") {
    cfg.y_axes = {1};
    const auto tr = splitting_involutivity_pipeline(skew_product(), skew_plane(Vector{{1.0, 0.0}}), skew_expanding(),
                                                    Box::cube(3, 0, 1), cfg);
    CHECK(tr.applicable);
    for (std::size_t e = 0; e < tr.eps.size(); ++e) {
      CHECK(tr.involutivity_bound[e].back() <= tr.involutivity_bound[e].front() / 10);
      CHECK(tr.regularity_bound[e].back() <= tr.regularity_bound[e].front() / 10);
      CHECK(tr.regularity[e].back() <= tr.regularity[e].front() / 10);
    }
    CHECK(tr.to_csv().find("applicable=true") != std::string::npos);
  }
  SUBCASE("identity") {
    cfg.k_max = 3;
    const auto tr = splitting_involutivity_pipeline(identity_map(2), horizontal(), col(Vector{{0.0, 1.0}}),
                                                    Box::cube(2, 0, 1), cfg);
    CHECK_FALSE(tr.applicable);
    for (const auto& r : tr.regularity_bound) CHECK(r.front() == doctest::Approx(r.back()));
    CHECK(tr.to_csv().find("NotApplicable") != std::string::npos);
  }
}
