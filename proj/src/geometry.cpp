#include "frob/geometry.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace frob {

Matrix GraphDistribution::spanning(const Vector& p) const {
  Matrix s(dim(), m());
  s.topRows(m()).setIdentity();
  s.bottomRows(n()) = coefficients(p);
  return s;
}

Vector GraphDistribution::field(int i, const Vector& p) const {
  Vector v = Vector::Zero(dim());
  v[i] = 1.0;
  v.tail(n()) = coefficients(p).col(i);
  return v;
}

Matrix GraphDistribution::field_jacobian(int i, const Vector& p) const {
  Matrix j = Matrix::Zero(dim(), dim());
  const auto dc = coefficient_derivatives(p);
  for (int k = 0; k < dim(); ++k) j.block(m(), k, n(), 1) = dc[k].col(i);
  return j;
}

Distribution::Distribution(std::vector<std::string> names, int m, std::vector<std::vector<Expr>> a, Box domain)
    : names_(std::move(names)), m_(m), n_(static_cast<int>(names_.size()) - m), a_(std::move(a)), domain_(std::move(domain)) {
  if (m_ < 1 || n_ < 1) throw DomainError("distribution: need 1 <= m < number of coordinates");
  if (static_cast<int>(a_.size()) != m_) throw DomainError("distribution: coefficient rows must equal m");
  for (const auto& row : a_)
    if (static_cast<int>(row.size()) != n_) throw DomainError("distribution: coefficient columns must equal n");
  if (domain_.dim() != 0 && domain_.dim() != dim()) throw DomainError("distribution: domain dimension mismatch");
  da_.resize(dim());
  for (int k = 0; k < dim(); ++k) {
    da_[k].resize(m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) da_[k][i].push_back(a_[i][j].diff(k));
  }
}

Distribution Distribution::parse(const std::vector<std::string>& names, int m,
                                 const std::vector<std::vector<std::string>>& a, Box domain) {
  std::vector<std::vector<Expr>> ex;
  for (const auto& row : a) {
    ex.emplace_back();
    for (const auto& s : row) ex.back().push_back(parse_expr(s, names));
  }
  return Distribution(names, m, std::move(ex), std::move(domain));
}

Matrix Distribution::coefficients(const Vector& p) const {
  Matrix c(n_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < n_; ++j) c(j, i) = a_[i][j].eval(p);
  return c;
}

std::vector<Matrix> Distribution::coefficient_derivatives(const Vector& p) const {
  std::vector<Matrix> out(dim(), Matrix::Zero(n_, m_));
  for (int k = 0; k < dim(); ++k)
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j)
        if (!da_[k][i][j].is_zero()) out[k](j, i) = da_[k][i][j].eval(p);
  return out;
}

ExprVector Distribution::spanning_field(int i) const {
  std::vector<Expr> comps(dim(), Expr(0.0));
  comps[i] = Expr(1.0);
  for (int j = 0; j < n_; ++j) comps[m_ + j] = a_[i][j];
  return ExprVector(names_, comps);
}

PlaneField plane_field(std::shared_ptr<const GraphDistribution> d) {
  return [d](const Vector& p) { return d->spanning(p); };
}

PlaneField kernel_field(CoframePtr frame) {
  return [frame](const Vector& p) { return kernel_basis(frame->values(p)); };
}

FrameSection::FrameSection(std::vector<std::string> names, std::vector<OneForm> rows, Box domain)
    : names_(std::move(names)), rows_(std::move(rows)), domain_(std::move(domain)) {
  for (const auto& r : rows_) {
    if (r.degree() != 1 || r.dim() != dim()) throw DomainError("frame: rows must be 1-forms on the coordinate space");
    drows_.push_back(exterior_derivative(r));
  }
}

Matrix FrameSection::values(const Vector& p) const {
  Matrix a(rows(), dim());
  for (int j = 0; j < rows(); ++j) a.row(j) = components(evaluate(rows_[j], p)).transpose();
  return a;
}

std::vector<Matrix> FrameSection::differentials(const Vector& p) const {
  std::vector<Matrix> out;
  for (const auto& d : drows_) out.push_back(two_form_matrix(evaluate(d, p)));
  return out;
}

FrameSection FrameSection::scaled(const Expr& c) const {
  std::vector<OneForm> r;
  for (const auto& f : rows_) r.push_back(f.scaled(c));
  return FrameSection(names_, r, domain_);
}

std::string FrameSection::str() const {
  std::string s;
  for (int j = 0; j < rows(); ++j) s += "eta" + std::to_string(j + 1) + " = " + to_string(rows_[j], names_) + "\n";
  return s;
}

FrameSection annihilator_frame(const Distribution& d) {
  std::vector<OneForm> rows;
  for (int j = 0; j < d.n(); ++j) {
    OneForm eta(d.dim(), 1);
    eta.set(MultiIndex{1} << (d.m() + j), Expr(1.0));
    for (int i = 0; i < d.m(); ++i) eta.set(MultiIndex{1} << i, -d.a(i, j));
    rows.push_back(eta);
  }
  return FrameSection(d.names(), rows, d.domain());
}

namespace {

class GraphAnnihilator : public Coframe {
 public:
  explicit GraphAnnihilator(std::shared_ptr<const GraphDistribution> d) : d_(std::move(d)) {}
  int rows() const override { return d_->n(); }
  int dim() const override { return d_->dim(); }
  Matrix values(const Vector& p) const override {
    Matrix a(d_->n(), d_->dim());
    a.leftCols(d_->m()) = -d_->coefficients(p);
    a.rightCols(d_->n()).setIdentity();
    return a;
  }
  // dη_j = −Σ_i Σ_k ∂_k a_ij dx^k ∧ dx^i
  std::vector<Matrix> differentials(const Vector& p) const override {
    const auto dc = d_->coefficient_derivatives(p);
    std::vector<Matrix> out(d_->n(), Matrix::Zero(dim(), dim()));
    for (int j = 0; j < d_->n(); ++j)
      for (int k = 0; k < dim(); ++k)
        for (int i = 0; i < d_->m(); ++i) {
          const double c = -dc[k](j, i);
          out[j](k, i) += c;
          out[j](i, k) -= c;
        }
    return out;
  }

 private:
  std::shared_ptr<const GraphDistribution> d_;
};

}  // namespace

CoframePtr annihilator_coframe(std::shared_ptr<const GraphDistribution> d) {
  return std::make_shared<GraphAnnihilator>(std::move(d));
}

std::vector<Form<Expr>> frobenius_wedges(const FrameSection& frame) {
  Form<Expr> lead = frame.forms().front();
  for (int j = 1; j < frame.rows(); ++j) lead = wedge(lead, frame.forms()[j]);
  std::vector<Form<Expr>> out;
  for (const auto& d : frame.dforms()) out.push_back(wedge(lead, d));
  return out;
}

double frobenius_defect(const Coframe& frame, const Vector& p) {
  const int n = frame.rows(), N = frame.dim();
  if (n + 2 > N) return 0.0;
  const Matrix a = frame.values(p);
  NumForm lead = one_form_from(a.row(0).transpose());
  for (int j = 1; j < n; ++j) lead = wedge(lead, one_form_from(a.row(j).transpose()));
  double worst = 0.0;
  for (const auto& om : frame.differentials(p)) worst = std::max(worst, norm(wedge(lead, two_form_from(om))));
  return worst;
}

std::vector<double> frobenius_defect(const Coframe& frame, const std::vector<Vector>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(frobenius_defect(frame, p));
  return out;
}

namespace {

std::vector<int> default_axes(const Coframe& frame, std::vector<int> y_axes) {
  if (y_axes.empty())
    for (int j = 0; j < frame.rows(); ++j) y_axes.push_back(frame.dim() - frame.rows() + j);
  if (static_cast<int>(y_axes.size()) != frame.rows()) throw DomainError("restricted inverse: need one transverse axis per row");
  return y_axes;
}

std::string point_str(const Vector& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  return os.str() + ")";
}

}  // namespace

RestrictedInverse restricted_inverse(const Coframe& frame, const Vector& p, std::vector<int> y_axes) {
  y_axes = default_axes(frame, std::move(y_axes));
  const Matrix a = frame.values(p);
  const int n = frame.rows();
  Matrix block(n, n);
  for (int c = 0; c < n; ++c) block.col(c) = a.col(y_axes[c]);
  Eigen::JacobiSVD<Matrix> svd(block);
  const auto& s = svd.singularValues();
  if (!(s[n - 1] > 1e-12 * std::max(1.0, s[0])))
    throw TransversalityError("restricted inverse: frame is not transverse to the y-plane at " + point_str(p));
  const Matrix inv = block.inverse();
  RestrictedInverse r;
  r.map = Matrix::Zero(frame.dim(), n);
  for (int c = 0; c < n; ++c) r.map.row(y_axes[c]) = inv.row(c);
  r.norm = 1.0 / s[n - 1];
  return r;
}

std::string SamplingProtocol::str() const {
  std::ostringstream os;
  os << "lattice=" << lattice << " n_dirs=" << n_dirs << " rounds=" << rounds << " seed=" << seed;
  return os.str();
}

double bilinear_sup(const std::vector<Matrix>& ms, int n_dirs, int rounds, std::uint64_t seed) {
  if (ms.empty() || ms[0].size() == 0) return 0.0;
  const int n_out = static_cast<int>(ms.size());
  const int p = static_cast<int>(ms[0].rows()), q = static_cast<int>(ms[0].cols());

  auto k_of_a = [&](const Vector& a) {
    Matrix k(n_out, q);
    for (int j = 0; j < n_out; ++j) k.row(j) = a.transpose() * ms[j];
    return k;
  };
  auto l_of_b = [&](const Vector& b) {
    Matrix l(n_out, p);
    for (int j = 0; j < n_out; ++j) l.row(j) = (ms[j] * b).transpose();
    return l;
  };
  if (n_out == 1) return sigma_max(ms[0]);
  if (p == 1) return sigma_max(k_of_a(Vector::Ones(1)));
  if (q == 1) return sigma_max(l_of_b(Vector::Ones(1)));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double best = 0.0;
  for (int s = 0; s < std::max(1, n_dirs); ++s) {
    Vector a(p);
    for (int i = 0; i < p; ++i) a[i] = g(rng);
    if (a.norm() == 0) continue;
    a.normalize();
    for (int r = 0; r <= rounds; ++r) {
      Eigen::JacobiSVD<Matrix> sk(k_of_a(a), Eigen::ComputeFullV);
      best = std::max(best, sk.singularValues()[0]);
      if (r == rounds || sk.singularValues()[0] == 0) break;
      const Vector b = sk.matrixV().col(0);
      Eigen::JacobiSVD<Matrix> sl(l_of_b(b), Eigen::ComputeFullV);
      best = std::max(best, sl.singularValues()[0]);
      a = sl.matrixV().col(0);
    }
  }
  return best;
}

PointDiagnostics diagnose_point(const Coframe& frame, const PlaneField& e, const Vector& p,
                                const SamplingProtocol& proto, const std::vector<int>& y_axes) {
  PointDiagnostics d;
  const Matrix a = frame.values(p);
  const auto om = frame.differentials(p);
  const Matrix q = orthonormalize(e(p));
  const RestrictedInverse inv = restricted_inverse(frame, p, y_axes);

  std::vector<Matrix> on_e, mixed;
  for (const auto& o : om) {
    on_e.push_back(q.transpose() * o * q);
    mixed.push_back(inv.map.transpose() * o * q);
    d.dform = std::max(d.dform, norm(two_form_from(o)));
  }
  d.dA_on_E = bilinear_sup(on_e, proto.n_dirs, proto.rounds, proto.seed);
  d.M = bilinear_sup(mixed, proto.n_dirs, proto.rounds, proto.seed);
  d.inverse_norm = inv.norm;
  d.defect = frobenius_defect(frame, p);
  d.annihilation = (a * q).norm();
  return d;
}

RegionDiagnostics diagnose_region(const Coframe& frame, const PlaneField& e, const Box& region,
                                  const SamplingProtocol& proto, const std::vector<int>& y_axes,
                                  const std::vector<Vector>& extra) {
  RegionDiagnostics r;
  r.protocol = proto.str();
  auto pts = lattice(region, proto.lattice);
  pts.insert(pts.end(), extra.begin(), extra.end());
  for (const auto& p : pts) {
    const PointDiagnostics d = diagnose_point(frame, e, p, proto, y_axes);
    r.sup.dA_on_E = std::max(r.sup.dA_on_E, d.dA_on_E);
    r.sup.inverse_norm = std::max(r.sup.inverse_norm, d.inverse_norm);
    r.sup.M = std::max(r.sup.M, d.M);
    r.sup.defect = std::max(r.sup.defect, d.defect);
    r.sup.dform = std::max(r.sup.dform, d.dform);
    r.sup.annihilation = std::max(r.sup.annihilation, d.annihilation);
  }
  r.points = static_cast<int>(pts.size());
  return r;
}

SupEstimate involutivity_constant(const Coframe& frame, const PlaneField& e, const Box& region,
                                  const SamplingProtocol& proto, const std::vector<int>& y_axes) {
  SupEstimate s;
  s.protocol = proto.str() + " (lower bound)";
  s.value = -1.0;
  for (const auto& p : lattice(region, proto.lattice)) {
    const Matrix q = orthonormalize(e(p));
    const RestrictedInverse inv = restricted_inverse(frame, p, y_axes);
    std::vector<Matrix> mixed;
    for (const auto& o : frame.differentials(p)) mixed.push_back(inv.map.transpose() * o * q);
    const double v = bilinear_sup(mixed, proto.n_dirs, proto.rounds, proto.seed);
    if (v > s.value) {
      s.value = v;
      s.argmax = p;
    }
  }
  return s;
}

std::string TraceReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# protocol: " << protocol << "\n";
  os << "k,q,strong,norm_factor,inverse_factor,M\n";
  for (std::size_t k = 0; k < q.size(); ++k) {
    os << k << "," << q[k] << ",";
    if (k < strong.size()) os << strong[k];
    os << "," << norm_factor[k] << "," << inverse_factor[k] << "," << M[k] << "\n";
  }
  return os.str();
}

TraceReport asymptotic_involutivity_trace(const std::vector<CoframePtr>& frames, const std::vector<PlaneField>& dists,
                                          double eps, const Box& region, const SamplingProtocol& proto,
                                          const std::vector<int>& y_axes) {
  if (frames.size() != dists.size()) throw DomainError("involutivity trace: frames and distributions differ in length");
  TraceReport t;
  t.protocol = proto.str();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const RegionDiagnostics d = diagnose_region(*frames[k], dists[k], region, proto, y_axes);
    if (d.sup.annihilation > 1e-8)
      throw DomainError("involutivity trace: frame " + std::to_string(k) + " does not annihilate its distribution");
    t.norm_factor.push_back(d.sup.dA_on_E);
    t.inverse_factor.push_back(d.sup.inverse_norm);
    t.M.push_back(d.sup.M);
    t.q.push_back(d.sup.dA_on_E * d.sup.inverse_norm * std::exp(eps * d.sup.M));
    t.strong.push_back(d.sup.defect * std::exp(eps * d.sup.dform));
  }
  return t;
}

TraceReport exterior_regularity_trace(const std::vector<CoframePtr>& frames, const PlaneField& e, double eps,
                                      const Box& region, const SamplingProtocol& proto, CoframePtr limit,
                                      const std::vector<int>& y_axes) {
  TraceReport t;
  t.protocol = proto.str();
  const auto pts = lattice(region, proto.lattice);
  for (const auto& frame : frames) {
    double restricted = 0.0, distance = 0.0;
    for (const auto& p : pts) {
      const Matrix b = frame->values(p);
      restricted = std::max(restricted, sigma_max(b * orthonormalize(e(p))));
      if (limit) {
        const Matrix diff = b - limit->values(p);
        for (int j = 0; j < diff.rows(); ++j) distance = std::max(distance, diff.row(j).norm());
      }
    }
    const RegionDiagnostics d = diagnose_region(*frame, kernel_field(frame), region, proto, y_axes);
    t.norm_factor.push_back(restricted);
    t.inverse_factor.push_back(d.sup.inverse_norm);
    t.M.push_back(d.sup.M);
    t.q.push_back(restricted * d.sup.inverse_norm * std::exp(eps * d.sup.M));
    if (limit) t.strong.push_back(distance * std::exp(eps * d.sup.dform));
  }
  return t;
}

double compatibility(const Coframe& a1, const Coframe& a2, const Vector& p, const std::vector<int>& y_axes) {
  return sigma_max(a1.values(p) * restricted_inverse(a2, p, y_axes).map);
}

}  // namespace frob
