#include "frob/forms.hpp"

#include <random>

namespace frob {

std::string to_string(const Form<Expr>& w, const std::vector<std::string>& names) {
  if (w.is_zero()) return "0";
  std::string out;
  for (const auto& [idx, c] : w.terms()) {
    std::string basis;
    for (MultiIndex rest = idx; rest; rest &= rest - 1) {
      const int k = std::countr_zero(rest);
      basis += (basis.empty() ? "d" : "^d") + (k < static_cast<int>(names.size()) ? names[k] : std::to_string(k));
    }
    if (!out.empty()) out += " + ";
    if (w.degree() == 0) {
      out += c.str(names);
    } else if (c.is_constant() && c.constant_value() == 1.0) {
      out += basis;
    } else {
      out += "(" + c.str(names) + ")*" + basis;
    }
  }
  return out;
}

Form<Expr> parse_one_form(std::string_view text, const std::vector<std::string>& names) {
  const int n = static_cast<int>(names.size());
  std::vector<std::string> ext = names;
  for (const auto& s : names) ext.push_back("d" + s);
  const Expr e = parse_expr(text, ext);
  const std::uint64_t coord_mask = (std::uint64_t{1} << n) - 1;

  Form<Expr> w(n, 1);
  for (int k = 0; k < n; ++k) {
    Expr c = e.diff(n + k);
    if (c.variables() & ~coord_mask) throw ParseError("one-form: not linear in the differentials", 1, 1);
    w.set(MultiIndex{1} << k, c);
  }

  // The part without differentials must vanish; checked at sample points
  // since structural simplification is not a decision procedure.
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 64 && checked < 8; ++trial) {
    Vector p(2 * n);
    for (int i = 0; i < 2 * n; ++i) p[i] = u(rng);
    try {
      double lin = 0.0;
      for (int k = 0; k < n; ++k) lin += w[MultiIndex{1} << k].eval(p) * p[n + k];
      const double full = e.eval(p);
      if (std::abs(full - lin) > 1e-9 * (1.0 + std::abs(full))) throw ParseError("one-form: term without a differential", 1, 1);
      ++checked;
    } catch (const DomainError&) {
    }
  }
  return w;
}

}  // namespace frob
