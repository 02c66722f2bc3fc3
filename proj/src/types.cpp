#include "frob/types.hpp"

#include <algorithm>
#include <cmath>

namespace frob {

Box::Box(Vector lower, Vector upper) : lo(std::move(lower)), hi(std::move(upper)) {
  if (lo.size() != hi.size()) throw DomainError("box: bound dimension mismatch");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw DomainError("box: lower bound exceeds upper bound");
}

Box Box::cube(int dim, double lower, double upper) {
  return Box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

Box Box::around(const Vector& center, double radius) {
  return Box(center.array() - radius, center.array() + radius);
}

bool Box::contains(const Vector& p, double tol) const {
  for (int i = 0; i < lo.size(); ++i)
    if (!(p[i] >= lo[i] - tol && p[i] <= hi[i] + tol)) return false;
  return true;
}

std::vector<Vector> lattice(const Box& box, int per_axis) {
  const int d = box.dim();
  if (per_axis < 1) throw DomainError("lattice: need at least one point per axis");
  std::vector<Vector> out;
  std::vector<int> idx(d, 0);
  while (true) {
    Vector p(d);
    for (int a = 0; a < d; ++a) {
      const double t = per_axis == 1 ? 0.5 : static_cast<double>(idx[a]) / (per_axis - 1);
      p[a] = box.lo[a] + t * (box.hi[a] - box.lo[a]);
    }
    out.push_back(std::move(p));
    int a = d - 1;
    while (a >= 0 && ++idx[a] == per_axis) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  return q;
}

Matrix kernel_basis(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const int r = static_cast<int>(a.rows());
  return svd.matrixV().rightCols(a.cols() - r);
}

double subspace_angle(const Matrix& q1, const Matrix& q2) {
  // sin of the largest principal angle is the norm of the part of q2 outside span(q1).
  Matrix resid = q2 - q1 * (q1.transpose() * q2);
  const double s = std::min(1.0, sigma_max(resid));
  return std::asin(s);
}

double sigma_max(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double sigma_min(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("fit_line: need at least two paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < n; ++i)
    f.max_residual = std::max(f.max_residual, std::abs(y[i] - f.slope * x[i] - f.intercept));
  return f;
}

}  // namespace frob
