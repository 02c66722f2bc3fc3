#pragma once

#include "frob/moduli.hpp"
#include "frob/types.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace frob {

// Values on a uniform tensor grid, row-major (last axis fastest). Cells
// outside [valid_lo, valid_hi] (inclusive, per axis) hold NaN.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<double> origin, std::vector<double> spacing, std::vector<int> count);

  static GridFunction sample(std::vector<double> origin, std::vector<double> spacing, std::vector<int> count,
                             const std::function<double(const Vector&)>& f);

  int dims() const { return static_cast<int>(count_.size()); }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& origin() const { return origin_; }
  const std::vector<double>& spacing() const { return spacing_; }
  const std::vector<int>& count() const { return count_; }
  const std::vector<int>& valid_lo() const { return valid_lo_; }
  const std::vector<int>& valid_hi() const { return valid_hi_; }
  void set_valid(std::vector<int> lo, std::vector<int> hi);

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t flat(const std::vector<int>& idx) const;
  std::vector<int> unflat(std::size_t k) const;
  Vector point(std::size_t k) const;
  bool is_valid(const std::vector<int>& idx) const;
  double extent(int axis) const { return spacing_[axis] * (count_[axis] - 1); }

  void write_binary(std::ostream& os) const;
  static GridFunction read_binary(std::istream& is);
  void write_csv(std::ostream& os) const;
  static GridFunction read_csv(std::istream& is);

 private:
  std::vector<double> origin_, spacing_;
  std::vector<int> count_;
  std::vector<int> valid_lo_, valid_hi_;
  std::vector<double> values_;
};

// Unnormalized bump exp(ε²/(|y|²−ε²)) on |y| < ε, zero outside.
double bump(double r2, double eps);

// Discrete kernel on a centered grid of spacing h (default ε/16), normalized
// so that sum · cell volume = 1.
GridFunction kernel(double eps, int d, double h = 0.0);

// Discrete convolution; the output is valid where the kernel stencil stays
// inside the input's valid region.
GridFunction mollify(const GridFunction& f, double eps);

struct MollifyReport {
  double eps = 0.0;
  double sup_dist = 0.0;
  std::vector<double> deriv_sup;
  double sup_integral = 0.0;                // ε^{-d} ∫_0^ε s^{d-1} w(s) ds
  std::vector<double> deriv_integral;       // ε^{-(d+1)} ∫_0^ε s^{d-1} w_j(s) ds
  double fitted_K = 0.0;                    // smallest K for this ε
  double overall_K = 0.0;                   // smallest K across the whole list
};

std::vector<MollifyReport> verify_bounds(const GridFunction& f, const Modulus& w,
                                         const std::vector<Modulus>& per_axis_w,
                                         const std::vector<double>& eps_list);

std::string reports_to_csv(const std::vector<MollifyReport>& reports);

// Pointwise mollification of an analytic function by midpoint quadrature
// over the kernel's support. The kernel is smooth with compact support, so
// the rule converges faster than any power of the node spacing; value,
// gradient and Hessian all use kernel derivatives against f.
class PointMollifier {
 public:
  PointMollifier(int dim, double eps, int cells_per_radius = 12);

  struct Jet {
    double value = 0.0;
    Vector grad;
    Matrix hess;
  };

  double eps() const { return eps_; }
  int dim() const { return dim_; }
  Jet jet(const std::function<double(const Vector&)>& f, const Vector& x, bool with_hessian = true) const;
  double value(const std::function<double(const Vector&)>& f, const Vector& x) const;

 private:
  int dim_;
  double eps_;
  std::vector<Vector> nodes_;
  std::vector<double> w0_;
  std::vector<Vector> w1_;
  std::vector<Matrix> w2_;
};

}  // namespace frob
