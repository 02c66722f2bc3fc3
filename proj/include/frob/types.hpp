#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace frob {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Every numeric failure the library reports derives from Error so callers
// (the CLI in particular) can surface the operation name uniformly.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : Error {
  using Error::Error;
};
struct ResolutionError : Error {
  using Error::Error;
};
struct MarginError : Error {
  using Error::Error;
};
struct TransversalityError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
struct SingularIntegrandError : Error {
  using Error::Error;
};
struct BranchCrossingError : Error {
  using Error::Error;
};
struct ConeError : Error {
  using Error::Error;
};

struct EscapeError : Error {
  EscapeError(const std::string& what, double exit_time)
      : Error(what), time(exit_time) {}
  double time;
};

struct ParseError : Error {
  ParseError(const std::string& msg, int line_no, int column_no)
      : Error(msg + " (line " + std::to_string(line_no) + ", column " +
              std::to_string(column_no) + ")"),
        line(line_no),
        column(column_no) {}
  int line;
  int column;
};

// Axis-aligned coordinate box.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lower, Vector upper);
  static Box cube(int dim, double lower, double upper);
  static Box around(const Vector& center, double radius);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& p, double tol = 0.0) const;
  Vector center() const { return 0.5 * (lo + hi); }
};

// Tensor lattice with `per_axis` points per coordinate (endpoints included).
std::vector<Vector> lattice(const Box& box, int per_axis);

// Orthonormal basis (columns) of the column span of `m`.
Matrix orthonormalize(const Matrix& m);

// Orthonormal basis of the kernel of the full-row-rank matrix `a`.
Matrix kernel_basis(const Matrix& a);

// Largest principal angle between the column spans of two orthonormal bases.
double subspace_angle(const Matrix& q1, const Matrix& q2);

// Largest and smallest singular values.
double sigma_max(const Matrix& m);
double sigma_min(const Matrix& m);

// Least-squares line y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace frob
