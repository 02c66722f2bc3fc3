#pragma once

#include "frob/geometry.hpp"
#include "frob/mollify.hpp"
#include "frob/odelab.hpp"

#include <memory>
#include <string>
#include <vector>

namespace frob {

// ∂y^i/∂x^j = F^{ij}(x, y) over coordinates (x¹..x^m, y¹..yⁿ).
struct PdeSpec {
  std::vector<std::string> names;
  int m = 0;
  std::vector<std::vector<Expr>> F;  // F[i][j], n × m
  Box domain;
  std::vector<DeclaredModulus> moduli;  // masks over the coordinates above
  int lattice = 0;                      // 0 picks ~2000 points

  static PdeSpec parse(const std::vector<std::string>& names, int m,
                       const std::vector<std::vector<std::string>>& F, Box domain);
  int n() const { return static_cast<int>(F.size()); }
  int dim() const { return static_cast<int>(names.size()); }
  std::uint64_t all_mask() const { return (std::uint64_t{1} << dim()) - 1; }
  // Graph distribution spanned by X_j = ∂/∂x^j + Σ_i F^{ij} ∂/∂y^i.
  Distribution distribution() const;
};

// F̂ = [I_n | F]: columns 1..n belong to y¹..yⁿ, columns n+1..n+m to x¹..x^m.
std::vector<std::vector<Expr>> hat_matrix(const PdeSpec& spec);
Matrix hat_matrix(const PdeSpec& spec, const Vector& xi);

// Coordinate index (into `names`) of a 1-based F̂ column.
int hat_column_coordinate(const PdeSpec& spec, int column);

// Columns I (1-based, strictly increasing, length n) of F̂ and their determinant.
std::vector<std::vector<Expr>> submatrix(const std::vector<std::vector<Expr>>& hat, const std::vector<int>& I);
Expr determinant(const std::vector<std::vector<Expr>>& a);

Modulus pde_modulus(const PdeSpec& spec, std::uint64_t mask, bool* declared = nullptr);

struct Theorem2Certificate {
  std::vector<int> I;
  double det = 0.0;
  bool applicable = false;  // det(F̂^I(ξ)) ≠ 0
  Modulus w1 = Modulus::lipschitz(0.0);
  Modulus w2 = Modulus::lipschitz(0.0);
  bool w1_declared = false;
  bool w2_declared = false;
  CriterionReport report;
  Verdict verdict = Verdict::Inconclusive;
  std::string verdict_name() const { return applicable ? to_string(verdict) : "NotApplicable"; }
  std::string to_csv() const;
};

Theorem2Certificate theorem2_check(const PdeSpec& spec, const Vector& xi, const std::vector<int>& I,
                                   const CriterionThresholds& th = {});

// F^{ij} = G_i(y^i)·∂H_i/∂x^j. Each G_i is written in its own y-name, each
// H_i in the x-names.
struct SpecialFormSpec {
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;
  std::vector<Expr> G;     // G[i] over the single variable y^i
  std::vector<Expr> H;     // H[i] over x
  std::vector<Expr> G_full;  // G[i] over all coordinates (x, y)
  Box domain;

  static SpecialFormSpec parse(const std::vector<std::string>& x_names, const std::vector<std::string>& y_names,
                               const std::vector<std::string>& G, const std::vector<std::string>& H, Box domain);
  int m() const { return static_cast<int>(x_names.size()); }
  int n() const { return static_cast<int>(y_names.size()); }
  std::vector<std::string> names() const;
  PdeSpec induced() const;
};

// Largest |F^{ij}_induced − F^{ij}| on a lattice of `pde.domain`.
double special_form_mismatch(const SpecialFormSpec& sf, const PdeSpec& pde, int per_axis = 5);

struct SpecialSolution {
  std::vector<Vector> targets;  // x points
  std::vector<Vector> y;
  std::vector<double> residual;  // max_ij |∂y^i/∂x^j − F^{ij}| by central differences
  double max_residual = 0.0;
  std::string to_csv(const SpecialFormSpec& sf) const;
};

// Solves ∫_{y0^i}^{y^i} ds/G_i(s) = H_i(x) − H_i(x0) per component.
SpecialSolution special_solve(const SpecialFormSpec& sf, const Vector& x0, const Vector& y0,
                              const std::vector<Vector>& targets);

// F^{ij}_ε = (G_i * φ_ε)(y^i)·∂_j(H_i * φ_ε)(x), evaluated with point mollifiers.
class MollifiedSpecialForm : public GraphDistribution {
 public:
  MollifiedSpecialForm(SpecialFormSpec sf, double eps, int cells_per_radius = 12);

  int m() const override { return sf_.m(); }
  int n() const override { return sf_.n(); }
  const Box& domain() const override { return sf_.domain; }
  Matrix coefficients(const Vector& p) const override;
  std::vector<Matrix> coefficient_derivatives(const Vector& p) const override;
  double eps() const { return g_.eps(); }

 private:
  SpecialFormSpec sf_;
  PointMollifier g_;
  PointMollifier h_;
};

struct MollifiedFrames {
  std::vector<double> eps;
  std::vector<std::shared_ptr<const MollifiedSpecialForm>> distributions;
  std::vector<CoframePtr> frames;
  std::vector<double> wedge;  // sup of the strong involutivity wedge on the lattice
  double wedge_tolerance = 1e-10;
  bool involutive() const;
};

MollifiedFrames involutive_mollified_frames(const SpecialFormSpec& sf, const std::vector<double>& eps,
                                            const Box& region, int per_axis = 5, int cells_per_radius = 12);

// paper-ex2 family with m = n = 2, α_ij = alpha and β_i = beta. The special form
// extends G and H evenly/oddly past 0 so mollification near the boundary
// stays defined; on the domain [0,1]⁴ it agrees with the PDE.
PdeSpec example2(double alpha, double beta);
SpecialFormSpec example2_special(double alpha, double beta);
// Closed-form y^i(x) for the paper-ex2 family.
Vector example2_exact(double alpha, double beta, const Vector& x0, const Vector& y0, const Vector& x);

struct Example3Params {
  double a11 = 0.7, a12 = 0.3, a21 = 0.7, a22 = 0.3, b1 = 0.3, b2 = 0.7;
};
// Declares w1 = Hoelder(min(a12, a22, b1)) and, over {x¹, y²}, w2 =
// LogLip(max(a11, a21, b2)).
PdeSpec example3(const Example3Params& p = {});

}  // namespace frob
