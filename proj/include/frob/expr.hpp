#pragma once

#include "frob/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace frob {

namespace detail {
struct Node;
}

// Immutable symbolic scalar over indexed coordinates. Construction
// simplifies eagerly: constants fold, sums collect structurally equal terms,
// products carry no numeric factor (that lives in the enclosing sum).
//
// Partial derivatives are kept canonical: diff() distributes over sums and
// otherwise returns a node keyed by (base expression, sorted index multiset),
// so mixed partials taken in different orders compare equal and cancel.
class Expr {
 public:
  Expr();
  Expr(double c);  // NOLINT(google-explicit-constructor): numeric literals read naturally

  static Expr var(int index);

  double eval(const Vector& p) const;
  double eval(const double* p) const;

  Expr diff(int index) const;
  Vector gradient(const Vector& p, int dim) const;

  bool is_zero() const;
  bool is_constant() const;
  double constant_value() const;
  bool depends_on(int index) const;
  std::uint64_t variables() const;

  std::string str(const std::vector<std::string>& names) const;
  std::string str() const;

  const detail::Node* node() const { return node_.get(); }
  std::size_t hash() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  friend Expr pow(const Expr& a, const Expr& b);
  friend Expr log(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr abs(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr sign(const Expr& a);

  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const detail::Node> node_;
};

Expr pow(const Expr& a, const Expr& b);
Expr log(const Expr& a);
Expr exp(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr abs(const Expr& a);
Expr sqrt(const Expr& a);
Expr sign(const Expr& a);

bool structurally_equal(const Expr& a, const Expr& b);

// Grammar: sums/products of numbers, coordinate names and function calls
// (log, ln, exp, sin, cos, abs, sqrt, sign), with ^ for powers and `pi`.
Expr parse_expr(std::string_view text, const std::vector<std::string>& names);

// A coordinate-vector of scalar expressions with its symbolic jacobian,
// built once at construction so evaluation stays read-only.
class ExprVector {
 public:
  ExprVector() = default;
  ExprVector(std::vector<std::string> names, std::vector<Expr> comps);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Expr>& comps() const { return comps_; }
  const Expr& operator[](int i) const { return comps_[i]; }
  int dim() const { return static_cast<int>(names_.size()); }
  int size() const { return static_cast<int>(comps_.size()); }

  Vector eval(const Vector& p) const;
  Matrix jacobian(const Vector& p) const;
  const std::vector<std::vector<Expr>>& jacobian_exprs() const { return jac_; }

 private:
  std::vector<std::string> names_;
  std::vector<Expr> comps_;
  std::vector<std::vector<Expr>> jac_;
};

ExprVector parse_vector(const std::vector<std::string>& components,
                        const std::vector<std::string>& names);

std::vector<std::string> split_names(std::string_view csv);

}  // namespace frob
