#include "frob/pdelab.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frob {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PdeSpec PdeSpec::parse(const std::vector<std::string>& names, int m, const std::vector<std::vector<std::string>>& F,
                       Box domain) {
  const int n = static_cast<int>(names.size()) - m;
  if (m < 1 || n < 1) throw DomainError("pde: need m >= 1 x-names and n >= 1 y-names");
  if (static_cast<int>(F.size()) != n) throw DomainError("pde: F needs one row per y-coordinate");
  if (domain.dim() != static_cast<int>(names.size())) throw DomainError("pde: domain dimension mismatch");
  PdeSpec s;
  s.names = names;
  s.m = m;
  s.domain = std::move(domain);
  for (const auto& row : F) {
    if (static_cast<int>(row.size()) != m) throw DomainError("pde: F rows need one entry per x-coordinate");
    std::vector<Expr> r;
    for (const auto& e : row) r.push_back(parse_expr(e, names));
    s.F.push_back(std::move(r));
  }
  return s;
}

Distribution PdeSpec::distribution() const {
  std::vector<std::vector<Expr>> a(m, std::vector<Expr>(n()));
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < m; ++j) a[j][i] = F[i][j];
  return Distribution(names, m, a, domain);
}

std::vector<std::vector<Expr>> hat_matrix(const PdeSpec& spec) {
  const int n = spec.n();
  std::vector<std::vector<Expr>> h(n, std::vector<Expr>(n + spec.m, Expr(0.0)));
  for (int i = 0; i < n; ++i) {
    h[i][i] = Expr(1.0);
    for (int j = 0; j < spec.m; ++j) h[i][n + j] = spec.F[i][j];
  }
  return h;
}

Matrix hat_matrix(const PdeSpec& spec, const Vector& xi) {
  const auto h = hat_matrix(spec);
  Matrix out(spec.n(), spec.n() + spec.m);
  for (int i = 0; i < out.rows(); ++i)
    for (int c = 0; c < out.cols(); ++c) out(i, c) = h[i][c].eval(xi);
  return out;
}

int hat_column_coordinate(const PdeSpec& spec, int column) {
  if (column < 1 || column > spec.dim()) throw DomainError("hat matrix: column out of range");
  return column <= spec.n() ? spec.m + column - 1 : column - spec.n() - 1;
}

namespace {

void check_columns(const std::vector<int>& I, int rows, int cols) {
  if (static_cast<int>(I.size()) != rows) throw DomainError("submatrix: need exactly n column indices");
  for (std::size_t k = 0; k < I.size(); ++k) {
    if (I[k] < 1 || I[k] > cols) throw DomainError("submatrix: column index out of range");
    if (k > 0 && I[k] <= I[k - 1]) throw DomainError("submatrix: column indices must be strictly increasing");
  }
}

}  // namespace

std::vector<std::vector<Expr>> submatrix(const std::vector<std::vector<Expr>>& hat, const std::vector<int>& I) {
  check_columns(I, static_cast<int>(hat.size()), hat.empty() ? 0 : static_cast<int>(hat[0].size()));
  std::vector<std::vector<Expr>> out;
  for (const auto& row : hat) {
    std::vector<Expr> r;
    for (int c : I) r.push_back(row[c - 1]);
    out.push_back(std::move(r));
  }
  return out;
}

Expr determinant(const std::vector<std::vector<Expr>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return Expr(1.0);
  if (n == 1) return a[0][0];
  Expr det(0.0);
  for (std::size_t c = 0; c < n; ++c) {
    if (a[0][c].is_zero()) continue;
    std::vector<std::vector<Expr>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(std::move(row));
    }
    const Expr term = a[0][c] * determinant(minor);
    det = c % 2 == 0 ? det + term : det - term;
  }
  return det;
}

Modulus pde_modulus(const PdeSpec& spec, std::uint64_t mask, bool* declared) {
  for (const auto& d : spec.moduli)
    if (d.mask == mask) {
      if (declared) *declared = true;
      return d.w;
    }
  if (declared) *declared = false;
  std::vector<Expr> comps;
  for (const auto& row : spec.F) comps.insert(comps.end(), row.begin(), row.end());
  return fit_closed_form(estimate_field_modulus(comps, spec.domain, spec.lattice, mask));
}

std::string Theorem2Certificate::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# theorem2 I=";
  for (std::size_t k = 0; k < I.size(); ++k) os << (k ? ";" : "") << I[k];
  os << " det=" << det << " verdict=" << verdict_name();
  if (applicable)
    os << " w1=" << w1.serialize() << (w1_declared ? " (declared)" : " (estimated)") << " w2=" << w2.serialize()
       << (w2_declared ? " (declared)" : " (estimated)");
  os << "\n";
  if (applicable) os << report.to_csv();
  return os.str();
}

Theorem2Certificate theorem2_check(const PdeSpec& spec, const Vector& xi, const std::vector<int>& I,
                                   const CriterionThresholds& th) {
  if (!spec.domain.contains(xi, 1e-12)) throw DomainError("theorem2_check: point outside the domain");
  check_columns(I, spec.n(), spec.dim());
  const Matrix hat = hat_matrix(spec, xi);
  Matrix sub(spec.n(), spec.n());
  for (int k = 0; k < spec.n(); ++k) sub.col(k) = hat.col(I[k] - 1);

  Theorem2Certificate c;
  c.I = I;
  c.det = sub.determinant();
  c.applicable = std::abs(c.det) > 1e-9;
  if (!c.applicable) return c;
  std::uint64_t mask = 0;
  for (int col : I) mask |= std::uint64_t{1} << hat_column_coordinate(spec, col);
  c.w1 = pde_modulus(spec, spec.all_mask(), &c.w1_declared);
  c.w2 = pde_modulus(spec, mask, &c.w2_declared);
  c.report = limit_condition_check(c.w1, c.w2, {}, th);
  c.verdict = c.report.verdict;
  return c;
}

SpecialFormSpec SpecialFormSpec::parse(const std::vector<std::string>& x_names,
                                       const std::vector<std::string>& y_names, const std::vector<std::string>& G,
                                       const std::vector<std::string>& H, Box domain) {
  if (G.size() != y_names.size() || H.size() != y_names.size())
    throw DomainError("special form: need one G and one H per y-coordinate");
  SpecialFormSpec s;
  s.x_names = x_names;
  s.y_names = y_names;
  s.domain = std::move(domain);
  if (s.domain.dim() != s.m() + s.n()) throw DomainError("special form: domain dimension mismatch");
  const auto all = s.names();
  for (int i = 0; i < s.n(); ++i) {
    s.G_full.push_back(parse_expr(G[i], all));
    if (s.G_full.back().variables() & ~(std::uint64_t{1} << (s.m() + i)))
      throw DomainError("special form: G_" + std::to_string(i + 1) + " may depend on " + y_names[i] + " only");
    s.G.push_back(parse_expr(G[i], {y_names[i]}));
    s.H.push_back(parse_expr(H[i], x_names));
  }
  return s;
}

std::vector<std::string> SpecialFormSpec::names() const {
  std::vector<std::string> all = x_names;
  all.insert(all.end(), y_names.begin(), y_names.end());
  return all;
}

PdeSpec SpecialFormSpec::induced() const {
  PdeSpec p;
  p.names = names();
  p.m = m();
  p.domain = domain;
  for (int i = 0; i < n(); ++i) {
    std::vector<Expr> row;
    // H is written over x only, whose indices coincide with the leading coordinates.
    for (int j = 0; j < m(); ++j) row.push_back(G_full[i] * H[i].diff(j));
    p.F.push_back(std::move(row));
  }
  return p;
}

double special_form_mismatch(const SpecialFormSpec& sf, const PdeSpec& pde, int per_axis) {
  const PdeSpec ind = sf.induced();
  if (ind.n() != pde.n() || ind.m != pde.m) throw DomainError("special form: shape differs from the PDE");
  double worst = 0.0;
  for (const auto& p : lattice(pde.domain, per_axis))
    for (int i = 0; i < pde.n(); ++i)
      for (int j = 0; j < pde.m; ++j) worst = std::max(worst, std::abs(ind.F[i][j].eval(p) - pde.F[i][j].eval(p)));
  return worst;
}

namespace {

double g_eval(const Expr& g, double y) { return g.eval(&y); }

double integrate_reciprocal(const Expr& g, double a, double b) {
  if (a == b) return 0.0;
  auto f = [&](double s) { return 1.0 / g_eval(g, s); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-13);
}

// y with ∫_{y0}^{y} ds/G = target, staying on the branch where G keeps the sign of G(y0).
double solve_component(const Expr& g, double y0, double target, double lo_bound, double hi_bound) {
  const double g0 = g_eval(g, y0);
  if (g0 == 0.0 || target == 0.0) return y0;
  const double dir = (target > 0) == (g0 > 0) ? 1.0 : -1.0;
  double limit = dir > 0 ? hi_bound : lo_bound;
  auto same_branch = [&](double y) {
    const double v = g_eval(g, y);
    return v != 0.0 && (v > 0) == (g0 > 0);
  };

  double lo = y0, acc = 0.0, step = 1e-3 * std::max(1.0, std::abs(y0));
  double hi = y0, acc_hi = 0.0;
  bool bracketed = false;
  for (int it = 0; it < 400 && !bracketed; ++it) {
    if (std::abs(limit - lo) <= 1e-14 * std::max(1.0, std::abs(lo)))
      throw BranchCrossingError("special_solve: solution leaves the separable branch before reaching H");
    double cand = lo + dir * step;
    if (dir * (cand - limit) >= 0) cand = lo + 0.5 * (limit - lo);
    // Pull the limit in to the first zero or sign change of G in (lo, cand].
    // Touching zeros (|y|^a) show up only as a dip in |G|, so the smallest
    // sample is refined by golden section.
    bool crossed = false;
    int k_min = 1;
    double g_min = INFINITY;
    for (int k = 1; k <= 16; ++k) {
      const double y = lo + (cand - lo) * k / 16;
      if (!same_branch(y)) {
        limit = y;
        crossed = true;
        break;
      }
      const double v = std::abs(g_eval(g, y));
      if (v < g_min) {
        g_min = v;
        k_min = k;
      }
    }
    if (crossed) continue;
    {
      double a = lo + (cand - lo) * (k_min - 1) / 16, b = lo + (cand - lo) * std::min(k_min + 1, 16) / 16;
      const double r = (std::sqrt(5.0) - 1) / 2;
      double c = b - r * (b - a), e = a + r * (b - a);
      double fc = std::abs(g_eval(g, c)), fe = std::abs(g_eval(g, e));
      for (int g_it = 0; g_it < 200 && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++g_it) {
        if (fc < fe) {
          b = e;
          e = c;
          fe = fc;
          c = b - r * (b - a);
          fc = std::abs(g_eval(g, c));
        } else {
          a = c;
          c = e;
          fc = fe;
          e = a + r * (b - a);
          fe = std::abs(g_eval(g, e));
        }
      }
      const double y = 0.5 * (a + b);
      if (std::abs(g_eval(g, y)) <= 1e-7 * std::abs(g0) && dir * (y - lo) > 0) {
        limit = y;
        continue;
      }
    }
    const double piece = integrate_reciprocal(g, lo, cand);
    if ((acc + piece - target) * (acc - target) <= 0) {
      hi = cand;
      acc_hi = acc + piece;
      bracketed = true;
    } else {
      lo = cand;
      acc += piece;
      step *= 2;
    }
  }
  if (!bracketed) throw BranchCrossingError("special_solve: could not bracket the target");

  // Φ(y) = ∫_{y0}^{y} ds/G − target, monotone on [lo, hi].
  auto phi = [&](double y) { return acc + integrate_reciprocal(g, lo, y) - target; };
  double a = lo, b = hi, fa = acc - target, fb = acc_hi - target;
  while (std::abs(b - a) > 1e-6 * std::max(1.0, std::abs(a))) {
    const double mid = 0.5 * (a + b);
    const double fm = phi(mid);
    if ((fm < 0) == (fa < 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
      fb = fm;
    }
  }
  double x0 = a, f0 = fa, x1 = b, f1 = fb;
  for (int it = 0; it < 60; ++it) {
    if (f1 == f0) break;
    double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    x2 = std::clamp(x2, std::min(a, b), std::max(a, b));
    const double dx = std::abs(x2 - x1);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = phi(x1);
    if (dx <= 1e-10 * std::max(1.0, std::abs(x1))) {
      // One more step past the tolerance costs nothing and sharpens FD residuals.
      if (f1 != f0) x1 = std::clamp(x1 - f1 * (x1 - x0) / (f1 - f0), std::min(a, b), std::max(a, b));
      break;
    }
  }
  return x1;
}

Vector solve_point(const SpecialFormSpec& sf, const Vector& x0, const Vector& y0, const Vector& x) {
  Vector y(sf.n());
  for (int i = 0; i < sf.n(); ++i) {
    const double target = sf.H[i].eval(x) - sf.H[i].eval(x0);
    y[i] = solve_component(sf.G[i], y0[i], target, sf.domain.lo[sf.m() + i], sf.domain.hi[sf.m() + i]);
  }
  return y;
}

}  // namespace

std::string SpecialSolution::to_csv(const SpecialFormSpec& sf) const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& n : sf.x_names) os << n << ",";
  for (const auto& n : sf.y_names) os << n << ",";
  os << "residual\n";
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (int j = 0; j < targets[k].size(); ++j) os << targets[k][j] << ",";
    for (int i = 0; i < y[k].size(); ++i) os << y[k][i] << ",";
    os << residual[k] << "\n";
  }
  return os.str();
}

SpecialSolution special_solve(const SpecialFormSpec& sf, const Vector& x0, const Vector& y0,
                              const std::vector<Vector>& targets) {
  if (x0.size() != sf.m() || y0.size() != sf.n()) throw DomainError("special_solve: basepoint shape mismatch");
  const PdeSpec pde = sf.induced();
  SpecialSolution s;
  s.targets = targets;
  for (const auto& x : targets) {
    const Vector y = solve_point(sf, x0, y0, x);
    Vector xi(sf.m() + sf.n());
    xi << x, y;
    double res = 0.0;
    for (int j = 0; j < sf.m(); ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Vector dy = (solve_point(sf, x0, y0, xp) - solve_point(sf, x0, y0, xm)) / (2 * h);
      for (int i = 0; i < sf.n(); ++i) res = std::max(res, std::abs(dy[i] - pde.F[i][j].eval(xi)));
    }
    s.y.push_back(y);
    s.residual.push_back(res);
    s.max_residual = std::max(s.max_residual, res);
  }
  return s;
}

MollifiedSpecialForm::MollifiedSpecialForm(SpecialFormSpec sf, double eps, int cells_per_radius)
    : sf_(std::move(sf)), g_(1, eps, cells_per_radius), h_(sf_.m(), eps, cells_per_radius) {}

Matrix MollifiedSpecialForm::coefficients(const Vector& p) const {
  const int m = sf_.m(), n = sf_.n();
  const Vector x = p.head(m);
  Matrix c(n, m);
  for (int i = 0; i < n; ++i) {
    const Expr& G = sf_.G[i];
    const Expr& H = sf_.H[i];
    const double g = g_.value([&](const Vector& v) { return G.eval(v); }, p.segment(m + i, 1));
    const auto jh = h_.jet([&](const Vector& v) { return H.eval(v); }, x, false);
    c.row(i) = g * jh.grad.transpose();
  }
  return c;
}

std::vector<Matrix> MollifiedSpecialForm::coefficient_derivatives(const Vector& p) const {
  const int m = sf_.m(), n = sf_.n();
  const Vector x = p.head(m);
  std::vector<Matrix> d(m + n, Matrix::Zero(n, m));
  for (int i = 0; i < n; ++i) {
    const Expr& G = sf_.G[i];
    const Expr& H = sf_.H[i];
    const auto jg = g_.jet([&](const Vector& v) { return G.eval(v); }, p.segment(m + i, 1), false);
    const auto jh = h_.jet([&](const Vector& v) { return H.eval(v); }, x, true);
    for (int k = 0; k < m; ++k) d[k].row(i) = jg.value * jh.hess.row(k);
    d[m + i].row(i) = jg.grad[0] * jh.grad.transpose();
  }
  return d;
}

bool MollifiedFrames::involutive() const {
  return std::all_of(wedge.begin(), wedge.end(), [&](double w) { return w <= wedge_tolerance; });
}

MollifiedFrames involutive_mollified_frames(const SpecialFormSpec& sf, const std::vector<double>& eps,
                                            const Box& region, int per_axis, int cells_per_radius) {
  MollifiedFrames out;
  const auto pts = lattice(region, per_axis);
  for (double e : eps) {
    auto d = std::make_shared<const MollifiedSpecialForm>(sf, e, cells_per_radius);
    auto f = annihilator_coframe(d);
    double w = 0.0;
    for (double v : frobenius_defect(*f, pts)) w = std::max(w, v);
    out.eps.push_back(e);
    out.distributions.push_back(d);
    out.frames.push_back(f);
    out.wedge.push_back(w);
  }
  return out;
}

PdeSpec example2(double alpha, double beta) {
  std::vector<std::vector<std::string>> F(2, std::vector<std::string>(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      F[i][j] = "-(x" + std::to_string(j + 1) + "^" + num(alpha) + ")*y" + std::to_string(i + 1) + "*log(y" +
                std::to_string(i + 1) + "^" + num(beta) + ")";
  PdeSpec s = PdeSpec::parse({"x1", "x2", "y1", "y2"}, 2, F, Box::cube(4, 0, 1));
  s.moduli.push_back({s.all_mask(), Modulus::max(Modulus::loglip(beta), Modulus::hoelder(alpha))});
  s.moduli.push_back({0b1100, Modulus::loglip(beta)});
  return s;
}

SpecialFormSpec example2_special(double alpha, double beta) {
  const std::string p = num(alpha + 1);
  const std::string h = "abs(x1)^" + p + "/" + p + " + abs(x2)^" + p + "/" + p;
  return SpecialFormSpec::parse({"x1", "x2"}, {"y1", "y2"},
                                {"-" + num(beta) + "*y1*log(abs(y1))", "-" + num(beta) + "*y2*log(abs(y2))"}, {h, h},
                                Box::cube(4, 0, 1));
}

Vector example2_exact(double alpha, double beta, const Vector& x0, const Vector& y0, const Vector& x) {
  auto H = [&](const Vector& v) {
    double s = 0.0;
    for (int j = 0; j < v.size(); ++j) s += std::pow(std::abs(v[j]), alpha + 1) / (alpha + 1);
    return s;
  };
  const double dH = H(x) - H(x0);
  Vector y(y0.size());
  for (int i = 0; i < y0.size(); ++i) y[i] = std::exp(std::log(y0[i]) * std::exp(-beta * dH));
  return y;
}

PdeSpec example3(const Example3Params& p) {
  PdeSpec s = PdeSpec::parse(
      {"x1", "x2", "y1", "y2"}, 2,
      {{"(1 - x1*log(x1^" + num(p.a11) + "))*(y1^" + num(p.b1) + " + 1)", "x2^" + num(p.a12) + "*(1 + y1^" + num(p.b1) + ")"},
       {"y2*log(y2^" + num(p.b2) + ")*x1*log(x1^" + num(p.a21) + ")", "-y2*log(y2^" + num(p.b2) + ")*x2^" + num(p.a22)}},
      Box::cube(4, 0, 1));
  s.moduli.push_back({s.all_mask(), Modulus::hoelder(std::min({p.a12, p.a22, p.b1}))});
  s.moduli.push_back({0b1001, Modulus::loglip(std::max({p.a11, p.a21, p.b2}))});
  return s;
}

}  // namespace frob
