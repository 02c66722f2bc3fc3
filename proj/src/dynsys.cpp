#include "frob/dynsys.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace frob {

namespace {

// Thin QR with a nonnegative diagonal in R.
void thin_qr(const Matrix& v, Matrix& q, Matrix& r) {
  Eigen::HouseholderQR<Matrix> qr(v);
  const auto c = v.cols();
  q = qr.householderQ() * Matrix::Identity(v.rows(), c);
  r = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < c; ++i)
    if (r(i, i) < 0) {
      r.row(i) *= -1;
      q.col(i) *= -1;
    }
}

std::vector<Vector> orbit(const DiffeoSpec& phi, const Vector& p, int k) {
  std::vector<Vector> z{phi.reduce(p)};
  for (int s = 0; s < k; ++s) z.push_back(phi.apply(z.back()));
  return z;
}

std::string vec_str(const Vector& v) {
  std::ostringstream os;
  os.precision(6);
  for (int i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
  return os.str();
}

std::vector<int> default_axes(int dim, int n, std::vector<int> axes) {
  if (!axes.empty()) return axes;
  for (int i = dim - n; i < dim; ++i) axes.push_back(i);
  return axes;
}

}  // namespace

DiffeoSpec DiffeoSpec::parse(const std::vector<std::string>& names, const std::vector<std::string>& map,
                             const std::vector<std::string>& inverse, bool torus) {
  if (map.size() != names.size() || inverse.size() != names.size())
    throw DomainError("diffeo: map and inverse need one component per coordinate");
  DiffeoSpec s;
  s.names = names;
  s.map = parse_vector(map, names);
  s.inverse = parse_vector(inverse, names);
  s.torus = torus;
  return s;
}

Vector DiffeoSpec::reduce(const Vector& p) const {
  if (!torus) return p;
  Vector q = p;
  for (int i = 0; i < q.size(); ++i) {
    q[i] -= std::floor(q[i]);
    if (q[i] >= 1.0) q[i] = 0.0;
  }
  return q;
}

Vector DiffeoSpec::apply(const Vector& p) const { return reduce(map.eval(p)); }
Vector DiffeoSpec::apply_inverse(const Vector& p) const { return reduce(inverse.eval(p)); }

Vector DiffeoSpec::iterate(const Vector& p, int k) const {
  if (k < 0) throw DomainError("diffeo: negative iterate");
  Vector q = reduce(p);
  for (int s = 0; s < k; ++s) q = apply(q);
  return q;
}

Matrix DiffeoSpec::jacobian(const Vector& p) const { return map.jacobian(p); }

Matrix DiffeoSpec::jacobian_power(const Vector& p, int k) const {
  Matrix j = Matrix::Identity(dim(), dim());
  Vector z = reduce(p);
  for (int s = 0; s < k; ++s) {
    j = jacobian(z) * j;
    z = apply(z);
  }
  return j;
}

Vector DiffeoSpec::displacement(const Vector& a, const Vector& b) const {
  Vector d = a - b;
  if (torus)
    for (int i = 0; i < d.size(); ++i) d[i] -= std::round(d[i]);
  return d;
}

void DiffeoSpec::validate(const Box& region, int per_axis, double tol) const {
  if (region.dim() != dim()) throw DomainError("diffeo: region dimension mismatch");
  for (const auto& p : lattice(region, per_axis)) {
    const double e1 = displacement(apply(apply_inverse(p)), reduce(p)).norm();
    const double e2 = displacement(apply_inverse(apply(p)), reduce(p)).norm();
    if (!(std::max(e1, e2) <= tol))
      throw DomainError("diffeo: inverse mismatch " + std::to_string(std::max(e1, e2)) + " at " + vec_str(p));
    if (!(std::abs(jacobian(p).determinant()) > 1e-12))
      throw DomainError("diffeo: singular jacobian at " + vec_str(p));
  }
}

DiffeoSpec cat_map() {
  return DiffeoSpec::parse({"x", "y"}, {"2*x + y", "x + y"}, {"x - y", "-x + 2*y"}, true);
}

DiffeoSpec skew_product(double amp) {
  std::ostringstream a;
  a.precision(17);
  a << amp;
  return DiffeoSpec::parse({"x", "y", "theta"}, {"2*x + y", "x + y", "theta + " + a.str() + "*sin(2*pi*x)"},
                           {"x - y", "-x + 2*y", "theta - " + a.str() + "*sin(2*pi*(x - y))"}, true);
}

DiffeoSpec identity_map(int d) {
  std::vector<std::string> names, comps;
  for (int i = 0; i < d; ++i) {
    names.push_back("x" + std::to_string(i + 1));
    comps.push_back(names.back());
  }
  return DiffeoSpec::parse(names, comps, comps, true);
}

double cat_lambda_minus() { return (3.0 - std::sqrt(5.0)) / 2.0; }
double cat_lambda_plus() { return (3.0 + std::sqrt(5.0)) / 2.0; }

Vector cat_contracting() {
  Vector v{{1.0, cat_lambda_minus() - 2.0}};
  return v.normalized();
}

Vector cat_expanding() {
  Vector v{{1.0, cat_lambda_plus() - 2.0}};
  return v.normalized();
}

PlaneField constant_plane(const Matrix& basis) {
  const Matrix q = orthonormalize(basis);
  return [q](const Vector&) { return q; };
}

double min_angle(const Matrix& q1, const Matrix& q2) {
  const double c = std::min(1.0, sigma_max(orthonormalize(q1).transpose() * orthonormalize(q2)));
  return std::acos(c);
}

TransportedPlane transport_point(const DiffeoSpec& phi, const PlaneField& E0, int k, const Vector& p,
                                 const PlaneField& F, double cone_tol) {
  if (k < 0) throw DomainError("transport: k must be nonnegative");
  const auto z = orbit(phi, p, k);
  const Matrix e0 = E0(z.back());
  if (e0.rows() != phi.dim() || e0.cols() < 1) throw DomainError("transport: plane has the wrong shape");
  if (F && min_angle(e0, F(z.back())) <= cone_tol)
    throw ConeError("transport: E0 meets the expanding cone at " + vec_str(z.back()));
  TransportedPlane t;
  t.point = z.front();
  t.basis = orthonormalize(e0);
  t.growth = Matrix::Identity(e0.cols(), e0.cols());
  for (int s = k; s >= 1; --s) {
    const Matrix v = phi.jacobian(z[s - 1]).partialPivLu().solve(t.basis);
    Matrix q, r;
    thin_qr(v, q, r);
    const Vector diag = r.diagonal();
    if (!(diag.minCoeff() > 1e-14 * diag.maxCoeff()))
      throw ConeError("transport: plane collapsed at step " + std::to_string(k - s + 1) + " from " + vec_str(p));
    t.basis = q;
    t.growth = r * t.growth;
  }
  return t;
}

TransportResult transport(const DiffeoSpec& phi, const PlaneField& E0, int k, const std::vector<Vector>& points,
                          const PlaneField& F, double cone_tol) {
  TransportResult r;
  r.k = k;
  for (const auto& p : points) {
    auto t = transport_point(phi, E0, k, p, F, cone_tol);
    r.points.push_back(t.point);
    r.bases.push_back(t.basis);
  }
  return r;
}

std::string TransportResult::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# transport k=" << k << " points=" << points.size() << "\n";
  if (points.empty()) return os.str();
  const auto d = points.front().size();
  for (Eigen::Index i = 0; i < d; ++i) os << (i ? "," : "") << "p" << i;
  for (Eigen::Index c = 0; c < bases.front().cols(); ++c)
    for (Eigen::Index i = 0; i < d; ++i) os << ",e" << c << "_" << i;
  os << "\n";
  for (std::size_t n = 0; n < points.size(); ++n) {
    for (Eigen::Index i = 0; i < d; ++i) os << (i ? "," : "") << points[n][i];
    for (Eigen::Index c = 0; c < bases[n].cols(); ++c)
      for (Eigen::Index i = 0; i < d; ++i) os << "," << bases[n](i, c);
    os << "\n";
  }
  return os.str();
}

PlaneField transported_field(const DiffeoSpec& phi, const PlaneField& E0, int k) {
  return [phi, E0, k](const Vector& p) { return transport_point(phi, E0, k, p).basis; };
}

RestrictedPower restricted_power(const DiffeoSpec& phi, const Vector& p, const Matrix& basis, int k) {
  const auto z = orbit(phi, p, k);
  const auto c = basis.cols();
  Matrix v = orthonormalize(basis), q, r;
  Matrix forward = Matrix::Identity(c, c);
  for (int s = 0; s < k; ++s) {
    thin_qr(phi.jacobian(z[s]) * v, q, r);
    v = q;
    forward = r * forward;
  }
  RestrictedPower out;
  out.norm = sigma_max(forward);
  out.conorm = sigma_min(forward);
  // Pulling the image back through Dφ^{-1} amplifies roundoff by the
  // expansion ratio squared, so invert the restricted matrix itself.
  out.inverse_norm = sigma_max(forward.triangularView<Eigen::Upper>().solve(Matrix::Identity(c, c)));
  return out;
}

SplittingReport domination_report(const DiffeoSpec& phi, const PlaneField& E0, const PlaneField& F,
                                  const std::vector<Vector>& points, const DominationConfig& cfg) {
  if (points.empty()) throw DomainError("domination: empty lattice");
  if (cfg.k_max < 1) throw DomainError("domination: k_max must be at least 1");
  const int d = phi.dim();
  const Matrix f0 = F(points.front());
  const Matrix e0 = E0(points.front());
  if (f0.rows() != d || e0.rows() != d || e0.cols() + f0.cols() != d)
    throw DomainError("domination: E and F must have complementary dimensions");
  const int codim = static_cast<int>(f0.cols());
  const auto axes = default_axes(d, codim, cfg.y_axes);
  Matrix Y = Matrix::Zero(d, codim);
  for (int j = 0; j < codim; ++j) Y(axes.at(j), j) = 1.0;

  SplittingReport rep;
  rep.eps = cfg.eps;
  rep.points = static_cast<int>(points.size());
  rep.one_step_F = INFINITY;
  for (int k = 1; k <= cfg.k_max; ++k) {
    double angle = 0.0, nE = 0.0, mF = INFINITY, nF = 0.0, dual = 0.0, cone = INFINITY;
    for (const auto& p : points) {
      const auto t = transport_point(phi, E0, k, p, F);
      const auto t1 = transport_point(phi, E0, k + 1, p, F);
      const Matrix fp = F(p);
      if (!(sigma_min(orthonormalize(fp).transpose() * fp) > 1e-12 * sigma_max(fp)))
        throw DomainError("domination: degenerate F sample at " + vec_str(p));
      angle = std::max(angle, subspace_angle(t.basis, t1.basis));
      nE = std::max(nE, 1.0 / sigma_min(t.growth));
      const auto rf = restricted_power(phi, p, fp, k);
      mF = std::min(mF, rf.conorm);
      nF = std::max(nF, rf.norm);
      dual = std::max(dual, std::abs(rf.conorm * rf.inverse_norm - 1.0));
      cone = std::min(cone, restricted_power(phi, p, Y, k).conorm / rf.conorm);
      if (k == 1) {
        const auto tl = transport_point(phi, E0, cfg.k_max, p, F);
        rep.one_step_E = std::max(rep.one_step_E, restricted_power(phi, p, tl.basis, 1).norm);
        rep.one_step_F = std::min(rep.one_step_F, rf.conorm);
      }
    }
    rep.k.push_back(k);
    rep.angle.push_back(angle);
    rep.norm_E.push_back(nE);
    rep.conorm_F.push_back(mF);
    rep.norm_F.push_back(nF);
    rep.duality.push_back(dual);
    rep.cone_constant.push_back(cone);
  }
  rep.q.assign(cfg.eps.size(), {});
  for (std::size_t e = 0; e < cfg.eps.size(); ++e)
    for (std::size_t i = 0; i < rep.k.size(); ++i)
      rep.q[e].push_back(rep.norm_E[i] * rep.norm_E[i] / rep.conorm_F[i] * std::exp(cfg.eps[e] * rep.norm_E[i]));
  std::vector<double> ks(rep.k.begin(), rep.k.end());
  rep.growth = fit_line(ks, rep.norm_E);
  rep.dominated = rep.one_step_E < rep.one_step_F * (1 - 1e-9);
  return rep;
}

std::string SplittingReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# splitting points=" << points << " dominated=" << (dominated ? "true" : "false")
     << " one_step_E=" << one_step_E << " one_step_F=" << one_step_F << " growth_C=" << growth.slope
     << " growth_D=" << growth.intercept << " growth_residual=" << growth.max_residual << "\n";
  os << "k,angle,norm_E,conorm_F,norm_F,duality,cone_constant";
  for (double e : eps) os << ",q_eps" << e;
  os << "\n";
  for (std::size_t i = 0; i < k.size(); ++i) {
    os << k[i] << "," << angle[i] << "," << norm_E[i] << "," << conorm_F[i] << "," << norm_F[i] << "," << duality[i]
       << "," << cone_constant[i];
    for (const auto& col : q) os << "," << col[i];
    os << "\n";
  }
  return os.str();
}

PullbackCoframe::PullbackCoframe(DiffeoSpec phi, CoframePtr base, int k) : phi_(std::move(phi)), base_(std::move(base)), k_(k) {
  if (!base_) throw DomainError("pullback: missing base coframe");
  if (base_->dim() != phi_.dim()) throw DomainError("pullback: dimension mismatch");
  if (k_ < 0) throw DomainError("pullback: k must be nonnegative");
}

Matrix PullbackCoframe::values(const Vector& p) const {
  return base_->values(phi_.iterate(p, k_)) * phi_.jacobian_power(p, k_);
}

std::vector<Matrix> PullbackCoframe::differentials(const Vector& p) const {
  const Matrix j = phi_.jacobian_power(p, k_);
  auto om = base_->differentials(phi_.iterate(p, k_));
  for (auto& o : om) o = j.transpose() * o * j;
  return om;
}

namespace {

class ConstantCoframe : public Coframe {
 public:
  explicit ConstantCoframe(Matrix rows) : rows_(std::move(rows)) {}
  int rows() const override { return static_cast<int>(rows_.rows()); }
  int dim() const override { return static_cast<int>(rows_.cols()); }
  Matrix values(const Vector&) const override { return rows_; }
  std::vector<Matrix> differentials(const Vector&) const override {
    return std::vector<Matrix>(rows_.rows(), Matrix::Zero(rows_.cols(), rows_.cols()));
  }

 private:
  Matrix rows_;
};

}  // namespace

CoframePtr constant_coframe(const Matrix& rows) { return std::make_shared<ConstantCoframe>(rows); }

PullbackFrames orthonormal_pullback_frames(const DiffeoSpec& phi, CoframePtr C0, const std::vector<int>& ks,
                                           const std::vector<Vector>& points, CoframePtr other,
                                           const std::vector<int>& y_axes) {
  for (const auto& base : {C0, other}) {
    if (!base) continue;
    for (const auto& p : points) {
      const Matrix c = base->values(phi.reduce(p));
      if ((c * c.transpose() - Matrix::Identity(c.rows(), c.rows())).cwiseAbs().maxCoeff() > 1e-10)
        throw DomainError("pullback: rows are not orthonormal at " + vec_str(p));
    }
  }
  PullbackFrames out;
  out.k = ks;
  out.compared = static_cast<bool>(other);
  for (int k : ks) {
    auto a = std::make_shared<PullbackCoframe>(phi, C0, k);
    out.frames.push_back(a);
    if (!other) continue;
    const PullbackCoframe b(phi, other, k);
    for (const auto& p : points)
      out.compatibility_error = std::max(out.compatibility_error, std::abs(compatibility(*a, b, p, y_axes) - 1.0));
  }
  return out;
}

SplittingTraces splitting_involutivity_pipeline(const DiffeoSpec& phi, const Matrix& E0, const Matrix& F,
                                                const Box& region, const PipelineConfig& cfg) {
  const int d = phi.dim();
  if (E0.rows() != d || F.rows() != d || E0.cols() + F.cols() != d)
    throw DomainError("pipeline: E0 and F must be complementary");
  const PlaneField e0 = constant_plane(E0), f = constant_plane(F);
  const int n = static_cast<int>(F.cols());
  const auto axes = default_axes(d, n, cfg.y_axes);

  SplittingTraces out;
  DominationConfig dc;
  dc.k_max = cfg.k_max;
  dc.eps = cfg.eps;
  dc.y_axes = axes;
  const auto dom_pts = lattice(region, cfg.domination_lattice);
  out.domination = domination_report(phi, e0, f, dom_pts, dc);
  out.applicable = out.domination.dominated;
  out.eps = cfg.eps;
  out.k = out.domination.k;

  const CoframePtr c0 = constant_coframe(kernel_basis(orthonormalize(E0).transpose()).transpose());
  std::vector<int> ks(out.k.begin(), out.k.end());
  const auto frames = orthonormal_pullback_frames(phi, c0, ks, dom_pts, nullptr, axes);
  std::vector<PlaneField> dists;
  for (const auto& fr : frames.frames) dists.push_back(kernel_field(fr));

  SamplingProtocol proto = cfg.proto;
  proto.lattice = cfg.lattice;
  out.involutivity_raw = asymptotic_involutivity_trace(frames.frames, dists, 0.0, region, proto, axes);
  const PlaneField limit = transported_field(phi, e0, cfg.k_max + cfg.limit_extra);
  out.regularity_raw = exterior_regularity_trace(frames.frames, limit, 0.0, region, proto, nullptr, axes);

  for (int k : ks) {
    double nl = 0.0;
    for (const auto& p : dom_pts) nl = std::max(nl, restricted_power(phi, p, limit(p), k).norm);
    out.norm_limit.push_back(nl);
  }

  const auto& dom = out.domination;
  for (double eps : cfg.eps) {
    std::vector<double> ib, rb, ig, rg;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const double nE = dom.norm_E[i], m = dom.conorm_F[i], grow = std::exp(eps * nE);
      ib.push_back(nE * nE / m * grow);
      rb.push_back(2 * std::max(nE, out.norm_limit[i]) / m * grow);
      const auto& a = out.involutivity_raw;
      ig.push_back(a.norm_factor[i] * a.inverse_factor[i] * std::exp(eps * a.M[i]));
      const auto& b = out.regularity_raw;
      rg.push_back(b.norm_factor[i] * b.inverse_factor[i] * std::exp(eps * b.M[i]));
    }
    out.involutivity_bound.push_back(ib);
    out.regularity_bound.push_back(rb);
    out.involutivity.push_back(ig);
    out.regularity.push_back(rg);
  }
  return out;
}

std::string SplittingTraces::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# traces applicable=" << (applicable ? "true" : "NotApplicable") << " protocol=" << involutivity_raw.protocol
     << "\n";
  os << "eps,k,involutivity_bound,regularity_bound,involutivity,regularity,norm_E,norm_limit,conorm_F\n";
  for (std::size_t e = 0; e < eps.size(); ++e)
    for (std::size_t i = 0; i < k.size(); ++i)
      os << eps[e] << "," << k[i] << "," << involutivity_bound[e][i] << "," << regularity_bound[e][i] << ","
         << involutivity[e][i] << "," << regularity[e][i] << "," << domination.norm_E[i] << "," << norm_limit[i]
         << "," << domination.conorm_F[i] << "\n";
  return os.str();
}

}  // namespace frob
