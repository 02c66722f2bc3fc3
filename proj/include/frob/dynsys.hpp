#pragma once

#include "frob/expr.hpp"
#include "frob/geometry.hpp"
#include "frob/types.hpp"

#include <string>
#include <vector>

namespace frob {

// Diffeomorphism of ℝ^d, or of the torus ℝ^d/ℤ^d when `torus` is set (points
// are reduced into [0,1)^d after every application; the jacobian of the lift
// is periodic so it is evaluated symbolically as written).
struct DiffeoSpec {
  std::vector<std::string> names;
  ExprVector map;
  ExprVector inverse;
  bool torus = false;

  static DiffeoSpec parse(const std::vector<std::string>& names, const std::vector<std::string>& map,
                          const std::vector<std::string>& inverse, bool torus);
  int dim() const { return static_cast<int>(names.size()); }
  Vector apply(const Vector& p) const;
  Vector apply_inverse(const Vector& p) const;
  Vector iterate(const Vector& p, int k) const;  // k ≥ 0
  Matrix jacobian(const Vector& p) const;
  // Dφ^k_p as a raw product; only for moderate k.
  Matrix jacobian_power(const Vector& p, int k) const;
  Vector reduce(const Vector& p) const;
  // Difference with torus wrap-around when applicable.
  Vector displacement(const Vector& a, const Vector& b) const;
  // φ∘φ⁻¹ = id and φ⁻¹∘φ = id to `tol`, jacobians nonsingular, on a lattice of `region`.
  void validate(const Box& region, int per_axis = 7, double tol = 1e-8) const;
};

// The cat map [[2,1],[1,1]] on 𝕋².
DiffeoSpec cat_map();
// (x, θ) ↦ (Ax, θ + amp·sin(2πx¹)) on 𝕋³ with A the cat map.
DiffeoSpec skew_product(double amp = 0.1);
DiffeoSpec identity_map(int d);

double cat_lambda_minus();
double cat_lambda_plus();
// Unit eigendirections of the cat matrix, as vectors in ℝ².
Vector cat_contracting();
Vector cat_expanding();

// Constant plane field spanned by the columns of `basis`.
PlaneField constant_plane(const Matrix& basis);

// Smallest principal angle between two subspaces (0 when they meet).
double min_angle(const Matrix& q1, const Matrix& q2);

struct TransportedPlane {
  Vector point;
  Matrix basis;   // orthonormal basis of E^k_p
  Matrix growth;  // Dφ^{−k} Q⁰ = basis · growth with Q⁰ orthonormal in E⁰_{φ^k p}
};

// E^k_p = Dφ^{−k}_{φ^k p} E⁰_{φ^k p}, re-orthonormalized each step. When `F`
// is given, E⁰ must make an angle > cone_tol with F at φ^k p.
TransportedPlane transport_point(const DiffeoSpec& phi, const PlaneField& E0, int k, const Vector& p,
                                 const PlaneField& F = {}, double cone_tol = 1e-3);

struct TransportResult {
  int k = 0;
  std::vector<Vector> points;
  std::vector<Matrix> bases;
  std::string to_csv() const;
};

TransportResult transport(const DiffeoSpec& phi, const PlaneField& E0, int k, const std::vector<Vector>& points,
                          const PlaneField& F = {}, double cone_tol = 1e-3);

// E^k as a plane field, evaluated on demand.
PlaneField transported_field(const DiffeoSpec& phi, const PlaneField& E0, int k);

// Restrictions of Dφ^k_p to a subspace given at p, via stepwise QR along
// the forward orbit.
struct RestrictedPower {
  double norm = 0.0;       // ‖Dφ^k|_S‖
  double conorm = 0.0;     // m(Dφ^k|_S)
  double inverse_norm = 0.0;  // ‖(Dφ^k|_S)^{-1}‖ from the triangular inverse
};
RestrictedPower restricted_power(const DiffeoSpec& phi, const Vector& p, const Matrix& basis, int k);

struct SplittingReport {
  std::vector<int> k;
  std::vector<double> angle;         // sup_p ∠(E^k_p, E^{k+1}_p)
  std::vector<double> norm_E;        // sup_p ‖Dφ^k|_{E^k_p}‖
  std::vector<double> conorm_F;      // inf_p m(Dφ^k|_{F_p})
  std::vector<double> norm_F;        // sup_p ‖Dφ^k|_{F_p}‖
  std::vector<double> duality;       // max_p |m·‖(Dφ^k|_F)^{-1}‖ − 1|
  std::vector<double> cone_constant;  // inf_p m(Dφ^k|_𝒴)/m(Dφ^k|_{F_p})
  std::vector<double> eps;
  std::vector<std::vector<double>> q;  // [eps][k]
  LineFit growth;                      // norm_E ≈ C·k + D
  double one_step_E = 0.0;             // sup_p ‖Dφ|_{E_p}‖ (k = 1)
  double one_step_F = 0.0;             // inf_p m(Dφ|_{F_p})
  bool dominated = false;
  int points = 0;

  double fitted_C() const { return growth.slope; }
  double fitted_D() const { return growth.intercept; }
  std::string to_csv() const;
};

struct DominationConfig {
  int k_max = 15;
  std::vector<double> eps{0.1, 0.5, 1.0};
  std::vector<int> y_axes;  // transverse coordinates for the cone constant (default: last codim)
};

// E0 is transported to E^k before restricting; F is sampled as given.
SplittingReport domination_report(const DiffeoSpec& phi, const PlaneField& E0, const PlaneField& F,
                                  const std::vector<Vector>& points, const DominationConfig& cfg = {});

// C^k = (φ^k)^* C⁰: values C⁰_{φ^k p}·Dφ^k_p and differentials
// (Dφ^k)ᵀ Ω⁰(φ^k p) Dφ^k.
class PullbackCoframe : public Coframe {
 public:
  PullbackCoframe(DiffeoSpec phi, CoframePtr base, int k);
  int rows() const override { return base_->rows(); }
  int dim() const override { return base_->dim(); }
  Matrix values(const Vector& p) const override;
  std::vector<Matrix> differentials(const Vector& p) const override;
  int k() const { return k_; }

 private:
  DiffeoSpec phi_;
  CoframePtr base_;
  int k_;
};

struct PullbackFrames {
  std::vector<int> k;
  std::vector<CoframePtr> frames;
  double compatibility_error = 0.0;  // max |‖A ∘ A'^{-1}‖ − 1| over lattice and k
  bool compared = false;
};

// Rows of C⁰ must be orthonormal on the lattice. When `other` is given (a
// second orthonormal annihilator of E⁰), its pullbacks are compared through
// the compatibility norm.
PullbackFrames orthonormal_pullback_frames(const DiffeoSpec& phi, CoframePtr C0, const std::vector<int>& ks,
                                           const std::vector<Vector>& points, CoframePtr other = nullptr,
                                           const std::vector<int>& y_axes = {});

// Constant coframe with the given rows.
CoframePtr constant_coframe(const Matrix& rows);

struct PipelineConfig {
  int k_max = 8;
  std::vector<double> eps{0.1, 0.5, 1.0};
  int lattice = 5;               // per axis, for the geometric traces
  int domination_lattice = 7;    // per axis, for the domination report
  int limit_extra = 12;          // E ≈ E^{k_max + limit_extra}
  std::vector<int> y_axes;
  SamplingProtocol proto{};
};

struct SplittingTraces {
  bool applicable = false;  // domination holds
  std::vector<int> k;
  std::vector<double> eps;
  // Estimates from the domination numbers:
  // ‖Dφ^k|E^k‖²/m · e^{ε‖Dφ^k|E^k‖} and 2max{‖Dφ^k|E^k‖, ‖Dφ^k|E‖}/m · e^{ε‖Dφ^k|E^k‖}.
  std::vector<std::vector<double>> involutivity_bound;  // [eps][k]
  std::vector<std::vector<double>> regularity_bound;
  // The geometric traces of the pulled-back frames (geometry module).
  std::vector<std::vector<double>> involutivity;
  std::vector<std::vector<double>> regularity;
  TraceReport involutivity_raw;
  TraceReport regularity_raw;
  std::vector<double> norm_limit;  // sup ‖Dφ^k|_E‖
  SplittingReport domination;
  std::string to_csv() const;
};

// Transport-and-pullback pipeline on the region: E^k by transport, C^k by pullback of the
// orthonormal annihilator of E⁰ (a constant field E0 is required), and both
// traces for every ε.
SplittingTraces splitting_involutivity_pipeline(const DiffeoSpec& phi, const Matrix& E0, const Matrix& F,
                                                const Box& region, const PipelineConfig& cfg = {});

}  // namespace frob
