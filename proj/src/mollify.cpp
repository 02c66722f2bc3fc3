#include "frob/mollify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace frob {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

GridFunction::GridFunction(std::vector<double> origin, std::vector<double> spacing, std::vector<int> count)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), count_(std::move(count)) {
  if (origin_.size() != count_.size() || spacing_.size() != count_.size() || count_.empty())
    throw DomainError("grid: axis descriptions disagree in length");
  std::size_t total = 1;
  for (std::size_t a = 0; a < count_.size(); ++a) {
    if (!(spacing_[a] > 0)) throw DomainError("grid: spacing must be positive");
    if (count_[a] < 1) throw DomainError("grid: every axis needs at least one point");
    total *= static_cast<std::size_t>(count_[a]);
    valid_lo_.push_back(0);
    valid_hi_.push_back(count_[a] - 1);
  }
  values_.assign(total, 0.0);
}

GridFunction GridFunction::sample(std::vector<double> origin, std::vector<double> spacing, std::vector<int> count,
                                  const std::function<double(const Vector&)>& f) {
  GridFunction g(std::move(origin), std::move(spacing), std::move(count));
  for (std::size_t k = 0; k < g.size(); ++k) g.values_[k] = f(g.point(k));
  return g;
}

void GridFunction::set_valid(std::vector<int> lo, std::vector<int> hi) {
  valid_lo_ = std::move(lo);
  valid_hi_ = std::move(hi);
  for (std::size_t k = 0; k < size(); ++k)
    if (!is_valid(unflat(k))) values_[k] = kNaN;
}

std::size_t GridFunction::flat(const std::vector<int>& idx) const {
  std::size_t k = 0;
  for (int a = 0; a < dims(); ++a) k = k * count_[a] + idx[a];
  return k;
}

std::vector<int> GridFunction::unflat(std::size_t k) const {
  std::vector<int> idx(dims());
  for (int a = dims() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(k % count_[a]);
    k /= count_[a];
  }
  return idx;
}

Vector GridFunction::point(std::size_t k) const {
  const auto idx = unflat(k);
  Vector p(dims());
  for (int a = 0; a < dims(); ++a) p[a] = origin_[a] + spacing_[a] * idx[a];
  return p;
}

bool GridFunction::is_valid(const std::vector<int>& idx) const {
  for (int a = 0; a < dims(); ++a)
    if (idx[a] < valid_lo_[a] || idx[a] > valid_hi_[a]) return false;
  return true;
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ParseError("grid: truncated binary payload", 1, 1);
  return v;
}

}  // namespace

// Layout: "GRDF", u32 version, u32 dims, per axis {f64 origin, f64 spacing,
// i32 count, i32 valid_lo, i32 valid_hi}, then row-major f64 payload.
void GridFunction::write_binary(std::ostream& os) const {
  os.write("GRDF", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(dims()));
  for (int a = 0; a < dims(); ++a) {
    put(os, origin_[a]);
    put(os, spacing_[a]);
    put<std::int32_t>(os, count_[a]);
    put<std::int32_t>(os, valid_lo_[a]);
    put<std::int32_t>(os, valid_hi_[a]);
  }
  os.write(reinterpret_cast<const char*>(values_.data()), static_cast<std::streamsize>(values_.size() * sizeof(double)));
}

GridFunction GridFunction::read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "GRDF", 4) != 0) throw ParseError("grid: missing GRDF header", 1, 1);
  if (get<std::uint32_t>(is) != 1) throw ParseError("grid: unsupported version", 1, 5);
  const auto d = get<std::uint32_t>(is);
  std::vector<double> origin(d), spacing(d);
  std::vector<int> count(d), lo(d), hi(d);
  for (std::uint32_t a = 0; a < d; ++a) {
    origin[a] = get<double>(is);
    spacing[a] = get<double>(is);
    count[a] = get<std::int32_t>(is);
    lo[a] = get<std::int32_t>(is);
    hi[a] = get<std::int32_t>(is);
  }
  GridFunction g(origin, spacing, count);
  g.valid_lo_ = lo;
  g.valid_hi_ = hi;
  if (!is.read(reinterpret_cast<char*>(g.values_.data()), static_cast<std::streamsize>(g.values_.size() * sizeof(double))))
    throw ParseError("grid: truncated binary payload", 1, 1);
  return g;
}

void GridFunction::write_csv(std::ostream& os) const {
  if (dims() > 2) throw DomainError("grid: CSV export supports 1-d and 2-d grids only");
  auto join = [&](auto const& v) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  os << "# grid dims=" << dims() << " origin=" << join(origin_) << " spacing=" << join(spacing_)
     << " count=" << join(count_) << " valid_lo=" << join(valid_lo_) << " valid_hi=" << join(valid_hi_) << "\n";
  os << (dims() == 1 ? "x0,value\n" : "x0,x1,value\n");
  std::ostringstream body;
  body.precision(17);
  for (std::size_t k = 0; k < size(); ++k) {
    const Vector p = point(k);
    for (int a = 0; a < dims(); ++a) body << p[a] << ",";
    body << values_[k] << "\n";
  }
  os << body.str();
}

GridFunction GridFunction::read_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# grid", 0) != 0) throw ParseError("grid: missing '# grid' header", 1, 1);
  auto field = [&](const std::string& key) {
    const auto pos = header.find(" " + key + "=");
    if (pos == std::string::npos) throw ParseError("grid: header lacks " + key, 1, 1);
    const auto start = pos + key.size() + 2;
    return header.substr(start, header.find(' ', start) - start);
  };
  auto doubles = [](const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ',');) out.push_back(std::stod(t));
    return out;
  };
  auto ints = [&](const std::string& s) {
    std::vector<int> out;
    for (double v : doubles(s)) out.push_back(static_cast<int>(v));
    return out;
  };
  GridFunction g(doubles(field("origin")), doubles(field("spacing")), ints(field("count")));
  g.valid_lo_ = ints(field("valid_lo"));
  g.valid_hi_ = ints(field("valid_hi"));
  std::string line;
  std::getline(is, line);  // column names
  int line_no = 2;
  for (std::size_t k = 0; k < g.size(); ++k) {
    ++line_no;
    if (!std::getline(is, line)) throw ParseError("grid: CSV ends early", line_no, 1);
    const auto comma = line.rfind(',');
    g.values_[k] = std::stod(line.substr(comma + 1));
  }
  return g;
}

double bump(double r2, double eps) {
  const double e2 = eps * eps;
  if (r2 >= e2) return 0.0;
  return std::exp(e2 / (r2 - e2));
}

namespace {

struct Stencil {
  std::vector<std::vector<int>> offsets;
  std::vector<double> weights;  // sum to 1
  std::vector<int> radius;
};

Stencil make_stencil(const std::vector<double>& h, double eps) {
  const int d = static_cast<int>(h.size());
  Stencil st;
  for (int a = 0; a < d; ++a) {
    if (eps / h[a] < 8.0) throw ResolutionError("kernel: fewer than 8 cells per radius on axis " + std::to_string(a));
    st.radius.push_back(static_cast<int>(std::floor(eps / h[a])));
  }
  std::vector<int> idx(d);
  for (int a = 0; a < d; ++a) idx[a] = -st.radius[a];
  double mass = 0.0;
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (idx[a] * h[a]) * (idx[a] * h[a]);
    const double v = bump(r2, eps);
    if (v > 0) {
      st.offsets.push_back(idx);
      st.weights.push_back(v);
      mass += v;
    }
    int a = d - 1;
    while (a >= 0 && idx[a] == st.radius[a]) {
      idx[a] = -st.radius[a];
      --a;
    }
    if (a < 0) break;
    ++idx[a];
  }
  for (double& w : st.weights) w /= mass;
  return st;
}

}  // namespace

GridFunction kernel(double eps, int d, double h) {
  if (!(eps > 0) || d < 1) throw DomainError("kernel: need eps > 0 and d >= 1");
  if (h == 0.0) h = eps / 16.0;
  const Stencil st = make_stencil(std::vector<double>(d, h), eps);
  std::vector<double> origin(d), spacing(d, h);
  std::vector<int> count(d);
  for (int a = 0; a < d; ++a) {
    origin[a] = -st.radius[a] * h;
    count[a] = 2 * st.radius[a] + 1;
  }
  GridFunction g(origin, spacing, count);
  const double cell = std::pow(h, d);
  for (std::size_t k = 0; k < st.offsets.size(); ++k) {
    std::vector<int> idx(d);
    for (int a = 0; a < d; ++a) idx[a] = st.offsets[k][a] + st.radius[a];
    g.values()[g.flat(idx)] = st.weights[k] / cell;
  }
  return g;
}

GridFunction mollify(const GridFunction& f, double eps) {
  const int d = f.dims();
  for (int a = 0; a < d; ++a)
    if (eps >= 0.5 * f.extent(a)) throw MarginError("mollify: eps is not smaller than half the extent of axis " + std::to_string(a));
  const Stencil st = make_stencil(f.spacing(), eps);

  std::vector<int> lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = f.valid_lo()[a] + st.radius[a];
    hi[a] = f.valid_hi()[a] - st.radius[a];
    if (lo[a] > hi[a]) throw MarginError("mollify: no interior left after removing the eps margin");
  }
  GridFunction out(f.origin(), f.spacing(), f.count());
  std::vector<int> src(d);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto idx = out.unflat(k);
    bool inside = true;
    for (int a = 0; a < d && inside; ++a) inside = idx[a] >= lo[a] && idx[a] <= hi[a];
    if (!inside) {
      out.values()[k] = kNaN;
      continue;
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < st.offsets.size(); ++s) {
      for (int a = 0; a < d; ++a) src[a] = idx[a] - st.offsets[s][a];
      acc += st.weights[s] * f.values()[f.flat(src)];
    }
    out.values()[k] = acc;
  }
  out.set_valid(lo, hi);
  return out;
}

namespace {

double radial_integral(const Modulus& w, double eps, int d) {
  auto integrand = [&](double s) { return std::pow(s, d - 1) * w.eval(s); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, eps, 15, 1e-12);
}

}  // namespace

std::vector<MollifyReport> verify_bounds(const GridFunction& f, const Modulus& w, const std::vector<Modulus>& per_axis_w,
                                         const std::vector<double>& eps_list) {
  const int d = f.dims();
  if (!per_axis_w.empty() && static_cast<int>(per_axis_w.size()) != d)
    throw DomainError("verify_bounds: need one per-axis modulus per dimension");
  std::vector<MollifyReport> out;
  for (double eps : eps_list) {
    for (int a = 0; a < d; ++a)
      if (f.spacing()[a] >= eps / 8.0) throw ResolutionError("verify_bounds: spacing h >= eps/8");
    const GridFunction g = mollify(f, eps);

    MollifyReport r;
    r.eps = eps;
    r.deriv_sup.assign(d, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      auto idx = g.unflat(k);
      if (!g.is_valid(idx)) continue;
      r.sup_dist = std::max(r.sup_dist, std::abs(g.values()[k] - f.values()[k]));
      for (int a = 0; a < d; ++a) {
        auto up = idx, dn = idx;
        ++up[a];
        --dn[a];
        if (!g.is_valid(up) || !g.is_valid(dn)) continue;
        const double deriv = (g.values()[g.flat(up)] - g.values()[g.flat(dn)]) / (2 * g.spacing()[a]);
        r.deriv_sup[a] = std::max(r.deriv_sup[a], std::abs(deriv));
      }
    }

    r.sup_integral = radial_integral(w, eps, d) / std::pow(eps, d);
    double K = r.sup_integral > 0 ? r.sup_dist / r.sup_integral : 0.0;
    for (int a = 0; a < d; ++a) {
      const Modulus& wa = per_axis_w.empty() ? w : per_axis_w[a];
      r.deriv_integral.push_back(radial_integral(wa, eps, d) / std::pow(eps, d + 1));
      if (r.deriv_integral[a] > 0) K = std::max(K, r.deriv_sup[a] / r.deriv_integral[a]);
    }
    r.fitted_K = K;
    out.push_back(r);
  }
  double overall = 0.0;
  for (const auto& r : out) overall = std::max(overall, r.fitted_K);
  for (auto& r : out) r.overall_K = overall;
  return out;
}

std::string reports_to_csv(const std::vector<MollifyReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "eps,sup_dist,sup_integral,fitted_K,overall_K";
  const std::size_t d = reports.empty() ? 0 : reports.front().deriv_sup.size();
  for (std::size_t a = 0; a < d; ++a) os << ",deriv_sup_" << a << ",deriv_integral_" << a;
  os << "\n";
  for (const auto& r : reports) {
    os << r.eps << "," << r.sup_dist << "," << r.sup_integral << "," << r.fitted_K << "," << r.overall_K;
    for (std::size_t a = 0; a < d; ++a) os << "," << r.deriv_sup[a] << "," << r.deriv_integral[a];
    os << "\n";
  }
  return os.str();
}

PointMollifier::PointMollifier(int dim, double eps, int cells_per_radius) : dim_(dim), eps_(eps) {
  if (!(eps > 0) || dim < 1) throw DomainError("point mollifier: need eps > 0 and dim >= 1");
  if (cells_per_radius < 4) throw ResolutionError("point mollifier: fewer than 4 cells per radius");
  const double h = eps / cells_per_radius;
  const int per_axis = 2 * cells_per_radius;
  const double e2 = eps * eps;

  // Raw kernel derivatives: ∇φ = φ·2g'·y, ∇²φ = φ·(A·yyᵀ + B·I) with
  // g(u) = ε²/(u − ε²), A = 4g'² + 4g'', B = 2g'.
  std::vector<double> phi, A, B;
  std::vector<int> idx(dim, 0);
  while (true) {
    Vector y(dim);
    for (int a = 0; a < dim; ++a) y[a] = -eps + (idx[a] + 0.5) * h;
    const double u = y.squaredNorm();
    const double p = bump(u, eps);
    if (p > 0) {
      const double den = u - e2;
      const double g1 = -e2 / (den * den);
      const double g2 = 2 * e2 / (den * den * den);
      nodes_.push_back(y);
      phi.push_back(p);
      A.push_back(p * (4 * g1 * g1 + 4 * g2));
      B.push_back(p * 2 * g1);
    }
    int a = dim - 1;
    while (a >= 0 && idx[a] == per_axis - 1) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) break;
    ++idx[a];
  }

  // The kernel is steep near its rim, so plain midpoint weights converge
  // slowly for derivatives. Rescale them so the rule reproduces the exact
  // mollified jet of every polynomial of degree <= 2 (the grid is symmetric,
  // which takes care of the odd moments).
  double R0 = 0, R2 = 0, S1 = 0, P2 = 0, P4 = 0, P22 = 0, Q0 = 0, Q2 = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double y0 = nodes_[k][0], y1 = dim > 1 ? nodes_[k][1] : 0.0;
    R0 += phi[k];
    R2 += phi[k] * y0 * y0;
    S1 += -B[k] * y0 * y0;
    P2 += A[k] * y0 * y0;
    P4 += A[k] * y0 * y0 * y0 * y0;
    P22 += A[k] * y0 * y0 * y1 * y1;
    Q0 += B[k];
    Q2 += B[k] * y0 * y0;
  }
  double a_diag = 0, a_off = 0, beta = 0, gamma = 0;
  if (dim == 1) {
    Eigen::Matrix2d m;
    m << P2, Q0, P4, Q2;
    const Eigen::Vector2d sol = m.fullPivLu().solve(Eigen::Vector2d(0, 2));
    a_diag = sol[0];
    beta = sol[1];
  } else {
    Eigen::Matrix3d m;
    m << P2, Q0, R0, P4, Q2, R2, P22, Q2, R2;
    const Eigen::Vector3d sol = m.fullPivLu().solve(Eigen::Vector3d(0, 2, 0));
    a_diag = sol[0];
    beta = sol[1];
    gamma = sol[2];
    a_off = 1.0 / P22;
  }

  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Vector& y = nodes_[k];
    w0_.push_back(phi[k] / R0);
    w1_.push_back(B[k] * y / S1);
    Matrix hs = a_off * A[k] * (y * y.transpose());
    for (int a = 0; a < dim; ++a) hs(a, a) = a_diag * A[k] * y[a] * y[a] + beta * B[k] + gamma * phi[k];
    w2_.push_back(hs);
  }
}

PointMollifier::Jet PointMollifier::jet(const std::function<double(const Vector&)>& f, const Vector& x,
                                        bool with_hessian) const {
  Jet j;
  j.grad = Vector::Zero(dim_);
  if (with_hessian) j.hess = Matrix::Zero(dim_, dim_);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double fv = f(x - nodes_[k]);
    j.value += w0_[k] * fv;
    j.grad += fv * w1_[k];
    if (with_hessian) j.hess += fv * w2_[k];
  }
  return j;
}

double PointMollifier::value(const std::function<double(const Vector&)>& f, const Vector& x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) v += w0_[k] * f(x - nodes_[k]);
  return v;
}

}  // namespace frob
