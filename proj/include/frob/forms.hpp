#pragma once

#include "frob/expr.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace frob {

// Sorted multi-index encoded as a bitmask over coordinate indices.
using MultiIndex = std::uint32_t;

inline int degree_of(MultiIndex m) { return std::popcount(m); }

// Sign of moving the basis covector `v` in front of dξ^J into sorted position.
inline double insertion_sign(MultiIndex j, int v) {
  const int below = std::popcount(j & ((MultiIndex{1} << v) - 1));
  return below % 2 ? -1.0 : 1.0;
}

// Sign of dξ^I ∧ dξ^J relative to dξ^{I∪J} (I, J disjoint).
inline double merge_sign(MultiIndex i, MultiIndex j) {
  int inversions = 0;
  for (MultiIndex rest = j; rest; rest &= rest - 1) {
    const int b = std::countr_zero(rest);
    inversions += std::popcount(i >> (b + 1));
  }
  return inversions % 2 ? -1.0 : 1.0;
}

namespace form_traits {
inline bool is_zero(double v) { return v == 0.0; }
inline bool is_zero(const Expr& v) { return v.is_zero(); }
}  // namespace form_traits

// Differential k-form on ℝ^dim with coefficients of type S (double or Expr).
// Only sorted multi-indices are stored, so antisymmetry is structural.
template <class S>
class Form {
 public:
  Form() = default;
  Form(int dim, int degree) : dim_(dim), degree_(degree) {}

  static Form coordinate(int dim, int index, const S& coef = S(1.0)) {
    Form f(dim, 1);
    f.set(MultiIndex{1} << index, coef);
    return f;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::map<MultiIndex, S>& terms() const { return terms_; }

  S operator[](MultiIndex idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? S(0.0) : it->second;
  }

  void set(MultiIndex idx, const S& v) {
    if (form_traits::is_zero(v)) terms_.erase(idx);
    else terms_[idx] = v;
  }

  void add(MultiIndex idx, const S& v) { set(idx, (*this)[idx] + v); }

  bool is_zero() const { return terms_.empty(); }

  Form operator+(const Form& o) const {
    Form r = *this;
    for (const auto& [i, v] : o.terms_) r.add(i, v);
    return r;
  }
  Form operator-(const Form& o) const {
    Form r = *this;
    for (const auto& [i, v] : o.terms_) r.add(i, S(-1.0) * v);
    return r;
  }
  Form scaled(const S& c) const {
    Form r(dim_, degree_);
    for (const auto& [i, v] : terms_) r.set(i, c * v);
    return r;
  }

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::map<MultiIndex, S> terms_;
};

using OneForm = Form<Expr>;
using NumForm = Form<double>;

// Exceeding the ambient dimension yields the zero form rather than an error.
template <class S>
Form<S> wedge(const Form<S>& a, const Form<S>& b) {
  Form<S> r(a.dim(), a.degree() + b.degree());
  if (a.degree() + b.degree() > a.dim()) return r;
  for (const auto& [i, u] : a.terms())
    for (const auto& [j, v] : b.terms()) {
      if (i & j) continue;
      r.add(i | j, S(merge_sign(i, j)) * (u * v));
    }
  return r;
}

// Exact symbolic exterior derivative.
inline Form<Expr> exterior_derivative(const Form<Expr>& w) {
  Form<Expr> r(w.dim(), w.degree() + 1);
  if (w.degree() + 1 > w.dim()) return r;
  for (const auto& [j, c] : w.terms())
    for (int v = 0; v < w.dim(); ++v) {
      if (j >> v & 1u) continue;
      Expr dc = c.diff(v);
      if (dc.is_zero()) continue;
      r.add(j | (MultiIndex{1} << v), Expr(insertion_sign(j, v)) * dc);
    }
  return r;
}

inline NumForm evaluate(const Form<Expr>& w, const Vector& p) {
  NumForm r(w.dim(), w.degree());
  for (const auto& [i, c] : w.terms()) r.set(i, c.eval(p));
  return r;
}

// Induced Euclidean norm: ℓ² over sorted multi-index components.
inline double norm(const NumForm& w) {
  double s = 0.0;
  for (const auto& [i, v] : w.terms()) s += v * v;
  return std::sqrt(s);
}

// Row vector of a 1-form's components.
inline Vector components(const NumForm& w) {
  Vector v = Vector::Zero(w.dim());
  for (const auto& [i, c] : w.terms()) v[std::countr_zero(i)] = c;
  return v;
}

inline NumForm one_form_from(const Eigen::Ref<const Vector>& row) {
  NumForm f(static_cast<int>(row.size()), 1);
  for (int i = 0; i < row.size(); ++i) f.set(MultiIndex{1} << i, row[i]);
  return f;
}

// Antisymmetric matrix Ω with ω(u,v) = uᵀΩv for a 2-form ω.
inline Matrix two_form_matrix(const NumForm& w) {
  Matrix m = Matrix::Zero(w.dim(), w.dim());
  for (const auto& [i, c] : w.terms()) {
    const int a = std::countr_zero(i);
    const int b = std::countr_zero(i & (i - 1));
    m(a, b) = c;
    m(b, a) = -c;
  }
  return m;
}

inline NumForm two_form_from(const Matrix& omega) {
  NumForm f(static_cast<int>(omega.rows()), 2);
  for (int a = 0; a < omega.rows(); ++a)
    for (int b = a + 1; b < omega.cols(); ++b) f.set((MultiIndex{1} << a) | (MultiIndex{1} << b), omega(a, b));
  return f;
}

std::string to_string(const Form<Expr>& w, const std::vector<std::string>& names);

// Parses a 1-form such as "dz - y*dx": differentials are `d<name>` for each
// coordinate name; the expression must be linear in them.
Form<Expr> parse_one_form(std::string_view text, const std::vector<std::string>& names);

}  // namespace frob
