#pragma once

#include "frob/expr.hpp"
#include "frob/forms.hpp"
#include "frob/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace frob {

// Columns span the plane E_p (not necessarily orthonormal).
using PlaneField = std::function<Matrix(const Vector&)>;

// Rank-m distribution in graph form over coordinates (x¹..x^m, y¹..yⁿ):
// X_i = ∂/∂x^i + Σ_j a_ij ∂/∂y^j. The coefficient matrix C is n×m with
// C(j, i) = a_ij.
class GraphDistribution {
 public:
  virtual ~GraphDistribution() = default;
  virtual int m() const = 0;
  virtual int n() const = 0;
  int dim() const { return m() + n(); }
  virtual const Box& domain() const = 0;
  virtual Matrix coefficients(const Vector& p) const = 0;
  // One n×m matrix per coordinate k holding ∂C/∂ξ^k.
  virtual std::vector<Matrix> coefficient_derivatives(const Vector& p) const = 0;

  Matrix spanning(const Vector& p) const;  // dim × m, [I; C]
  Vector field(int i, const Vector& p) const;
  Matrix field_jacobian(int i, const Vector& p) const;
};

// Symbolic distribution; a[i][j] = a_ij.
class Distribution : public GraphDistribution {
 public:
  Distribution(std::vector<std::string> names, int m, std::vector<std::vector<Expr>> a, Box domain);
  static Distribution parse(const std::vector<std::string>& names, int m,
                            const std::vector<std::vector<std::string>>& a, Box domain);

  int m() const override { return m_; }
  int n() const override { return n_; }
  const Box& domain() const override { return domain_; }
  Matrix coefficients(const Vector& p) const override;
  std::vector<Matrix> coefficient_derivatives(const Vector& p) const override;

  const std::vector<std::string>& names() const { return names_; }
  const Expr& a(int i, int j) const { return a_[i][j]; }
  ExprVector spanning_field(int i) const;

 private:
  std::vector<std::string> names_;
  int m_, n_;
  std::vector<std::vector<Expr>> a_;
  std::vector<std::vector<std::vector<Expr>>> da_;  // [k][i][j]
  Box domain_;
};

PlaneField plane_field(std::shared_ptr<const GraphDistribution> d);

// An n×N matrix of 1-forms with their exterior derivatives, evaluated
// pointwise. Differentials come back as antisymmetric Ω_j with
// dη_j(u, v) = uᵀ Ω_j v.
class Coframe {
 public:
  virtual ~Coframe() = default;
  virtual int rows() const = 0;
  virtual int dim() const = 0;
  virtual Matrix values(const Vector& p) const = 0;
  virtual std::vector<Matrix> differentials(const Vector& p) const = 0;
};

using CoframePtr = std::shared_ptr<const Coframe>;

// Kernel of the coframe at each point.
PlaneField kernel_field(CoframePtr frame);

class FrameSection : public Coframe {
 public:
  FrameSection(std::vector<std::string> names, std::vector<OneForm> rows, Box domain = {});

  int rows() const override { return static_cast<int>(rows_.size()); }
  int dim() const override { return static_cast<int>(names_.size()); }
  Matrix values(const Vector& p) const override;
  std::vector<Matrix> differentials(const Vector& p) const override;

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<OneForm>& forms() const { return rows_; }
  const std::vector<Form<Expr>>& dforms() const { return drows_; }
  const Box& domain() const { return domain_; }
  FrameSection scaled(const Expr& c) const;
  std::string str() const;

 private:
  std::vector<std::string> names_;
  std::vector<OneForm> rows_;
  std::vector<Form<Expr>> drows_;
  Box domain_;
};

// η_j = dy^j − Σ_i a_ij dx^i, symbolically.
FrameSection annihilator_frame(const Distribution& d);

// Same construction for any graph distribution, numerically.
CoframePtr annihilator_coframe(std::shared_ptr<const GraphDistribution> d);

// η₁∧⋯∧η_n∧dη_j for each j, as symbolic forms.
std::vector<Form<Expr>> frobenius_wedges(const FrameSection& frame);

// max_j |η₁∧⋯∧η_n∧dη_j(p)| in the ℓ² norm on sorted components.
double frobenius_defect(const Coframe& frame, const Vector& p);
std::vector<double> frobenius_defect(const Coframe& frame, const std::vector<Vector>& points);

struct RestrictedInverse {
  Matrix map;  // dim × n, lands in span{∂/∂y}
  double norm = 0.0;
};

// `y_axes` selects the transverse coordinates (default: the last n).
RestrictedInverse restricted_inverse(const Coframe& frame, const Vector& p, std::vector<int> y_axes = {});

struct SamplingProtocol {
  int lattice = 17;
  int n_dirs = 256;
  int rounds = 3;
  std::uint64_t seed = 20240601;
  std::string str() const;
};

// sup over unit a, b of |(aᵀ M_j b)_j|₂. Exact when any factor is 1-d,
// otherwise seeded sphere sampling with alternating refinement from every
// start, so the estimate never decreases as n_dirs grows.
double bilinear_sup(const std::vector<Matrix>& ms, int n_dirs, int rounds, std::uint64_t seed);

// Per-point ingredients of the involutivity functionals.
struct PointDiagnostics {
  double dA_on_E = 0.0;       // sup_{u,v ∈ E unit} |dA(u, v)|
  double inverse_norm = 0.0;  // ‖A⁻¹|_𝒴‖
  double M = 0.0;             // sup |dA(A⁻¹w, v)|, v ∈ E, |w| = |v| = 1
  double defect = 0.0;        // Frobenius defect
  double dform = 0.0;         // max_j |dη_j|
  double annihilation = 0.0;  // |A·Q_E| (should vanish)
};

PointDiagnostics diagnose_point(const Coframe& frame, const PlaneField& e, const Vector& p,
                                const SamplingProtocol& proto, const std::vector<int>& y_axes = {});

// Lattice sups of every PointDiagnostics entry over `region`, optionally
// including extra sample points.
struct RegionDiagnostics {
  PointDiagnostics sup;
  std::string protocol;
  int points = 0;
};

RegionDiagnostics diagnose_region(const Coframe& frame, const PlaneField& e, const Box& region,
                                  const SamplingProtocol& proto, const std::vector<int>& y_axes = {},
                                  const std::vector<Vector>& extra = {});

struct SupEstimate {
  double value = 0.0;
  Vector argmax;
  std::string protocol;
};

// M_A over the region; a lower bound for the true sup.
SupEstimate involutivity_constant(const Coframe& frame, const PlaneField& e, const Box& region,
                                  const SamplingProtocol& proto = {}, const std::vector<int>& y_axes = {});

struct TraceReport {
  std::vector<double> q;
  std::vector<double> strong;
  std::vector<double> norm_factor;     // ‖dA^k|_{E^k}‖ or ‖B^k|_E‖
  std::vector<double> inverse_factor;  // ‖A^{-k}‖
  std::vector<double> M;               // M^k
  std::string protocol;
  std::string to_csv() const;
};

TraceReport asymptotic_involutivity_trace(const std::vector<CoframePtr>& frames, const std::vector<PlaneField>& dists,
                                          double eps, const Box& region, const SamplingProtocol& proto = {},
                                          const std::vector<int>& y_axes = {});

// `limit` is the limit coframe β used by the strong surrogate; when absent the
// strong column is left empty.
TraceReport exterior_regularity_trace(const std::vector<CoframePtr>& frames, const PlaneField& e, double eps,
                                      const Box& region, const SamplingProtocol& proto = {},
                                      CoframePtr limit = nullptr, const std::vector<int>& y_axes = {});

// ‖A₁ ∘ A₂⁻¹‖ for two coframes annihilating the same plane.
double compatibility(const Coframe& a1, const Coframe& a2, const Vector& p, const std::vector<int>& y_axes = {});

}  // namespace frob
