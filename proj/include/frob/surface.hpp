#pragma once

#include "frob/geometry.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace frob {

struct VectorField {
  int dim = 0;
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;  // may be empty

  static VectorField from_expr(const ExprVector& v);
  // Spanning field X_i of a graph distribution.
  static VectorField from_distribution(std::shared_ptr<const GraphDistribution> d, int i);
};

enum class JacobianMode { Symbolic, FiniteDifference };

struct FlowConfig {
  double h = 1e-3;
  double max_time = 10.0;
  JacobianMode jacobian_mode = JacobianMode::Symbolic;
  Box domain;  // empty: unbounded
};

// Fixed-step RK4 endpoint. Leaving `cfg.domain` raises EscapeError carrying
// the exit time. `path`, when given, receives every intermediate state.
Vector flow(const VectorField& x, const Vector& x0, double t, const FlowConfig& cfg,
            std::vector<Vector>* path = nullptr);

struct VariationalResult {
  Vector point;
  Vector tangent;
};

// Base flow together with De^{tX}_{x0}·y0.
VariationalResult variational_flow(const VectorField& x, const Vector& x0, double t, const Vector& y0,
                                   const FlowConfig& cfg, std::vector<Vector>* path = nullptr);

// Samples of W(t) = e^{t_m X_m} ∘ ⋯ ∘ e^{t_1 X_1}(x0) on the grid
// t_i ∈ {ε₁(2k − (res−1))/(res−1)}. Nodes are stored row-major in
// (t_1, …, t_m); tangents are finite differences of the stored points.
struct SurfacePatch {
  int m = 0;
  int dim = 0;
  int res = 0;
  double eps1 = 0.0;
  Vector x0;
  std::vector<int> order;  // composition order, first applied first
  std::vector<Vector> params;
  std::vector<Vector> points;
  std::vector<Matrix> tangents;  // dim × m per node

  double spacing() const { return 2 * eps1 / (res - 1); }
  std::size_t index(const std::vector<int>& node) const;
  std::string to_csv(const Matrix* defect = nullptr) const;
};

SurfacePatch build_surface(std::shared_ptr<const GraphDistribution> d, const Vector& x0, double eps1, int res,
                           const FlowConfig& cfg, std::vector<int> order = {});

struct DefectReport {
  Matrix defect;  // nodes × m
  double max_defect = 0.0;
  double rhs = 0.0;
  double fd_tolerance = 0.0;
  double margin = 0.0;  // rhs + fd_tolerance − max_defect
  double dA_on_E = 0.0;
  double inverse_norm = 0.0;
  double M = 0.0;
  std::string protocol;
  bool holds() const { return margin >= 0.0; }
};

// Tangency defect against mε₁·‖dA|_E‖·‖A⁻¹‖·e^{mε₁M_A}, the sups taken over
// the patch nodes and a lattice on their bounding box.
DefectReport tangency_defect(const SurfacePatch& patch, std::shared_ptr<const GraphDistribution> d,
                             const Coframe& frame, const SamplingProtocol& proto = {},
                             const std::vector<int>& y_axes = {});

struct PushforwardCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  double frame_sup = 0.0;     // sup over the base points of |A_x(Y)|
  double inverse_norm = 0.0;  // ‖A⁻¹‖ at the endpoint
  double M = 0.0;
  double eps1 = 0.0;
};

PushforwardCheck pushforward_bound_check(std::shared_ptr<const GraphDistribution> d, const Coframe& frame,
                                         const Vector& x0, const std::vector<double>& times, const Vector& y0,
                                         const FlowConfig& cfg, const SamplingProtocol& proto = {},
                                         const std::vector<int>& y_axes = {});

enum class ConvergenceVerdict { Converged, NotConverged, Inconclusive };
std::string to_string(ConvergenceVerdict v);

struct ConvergenceReport {
  std::vector<double> displacement;  // between successive patches
  std::vector<double> angle;         // sup angle to E^k per patch
  ConvergenceVerdict verdict = ConvergenceVerdict::Inconclusive;
  double angle_tolerance = 1e-3;
  std::string to_csv() const;
};

ConvergenceReport converge_surfaces(const std::vector<SurfacePatch>& patches, const std::vector<PlaneField>& e,
                                    double angle_tolerance = 1e-3);

// Largest node distance between the default composition order and its reverse.
double order_sensitivity(std::shared_ptr<const GraphDistribution> d, const Vector& x0, double eps1, int res,
                         const FlowConfig& cfg);

}  // namespace frob
