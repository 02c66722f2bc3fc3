#include "frob/surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frob {

VectorField VectorField::from_expr(const ExprVector& v) {
  auto shared = std::make_shared<ExprVector>(v);
  VectorField f;
  f.dim = v.dim();
  f.value = [shared](const Vector& p) { return shared->eval(p); };
  f.jacobian = [shared](const Vector& p) { return shared->jacobian(p); };
  return f;
}

VectorField VectorField::from_distribution(std::shared_ptr<const GraphDistribution> d, int i) {
  VectorField f;
  f.dim = d->dim();
  f.value = [d, i](const Vector& p) { return d->field(i, p); };
  f.jacobian = [d, i](const Vector& p) { return d->field_jacobian(i, p); };
  return f;
}

namespace {

Matrix fd_jacobian(const VectorField& x, const Vector& p) {
  Matrix j(x.dim, x.dim);
  for (int k = 0; k < x.dim; ++k) {
    const double h = 1e-6 * (1.0 + std::abs(p[k]));
    Vector a = p, b = p;
    a[k] += h;
    b[k] -= h;
    j.col(k) = (x.value(a) - x.value(b)) / (2 * h);
  }
  return j;
}

Matrix jacobian_of(const VectorField& x, const Vector& p, JacobianMode mode) {
  if (mode == JacobianMode::Symbolic && x.jacobian) return x.jacobian(p);
  return fd_jacobian(x, p);
}

void check_inside(const FlowConfig& cfg, const Vector& p, double t) {
  if (cfg.domain.dim() == 0) return;
  if (!cfg.domain.contains(p, 1e-12)) {
    std::ostringstream os;
    os << "flow: trajectory left the domain at t=" << t;
    throw EscapeError(os.str(), t);
  }
}

int step_count(double t, double h) { return std::max(1, static_cast<int>(std::ceil(std::abs(t) / h - 1e-9))); }

}  // namespace

Vector flow(const VectorField& x, const Vector& x0, double t, const FlowConfig& cfg, std::vector<Vector>* path) {
  if (!(cfg.h > 0)) throw DomainError("flow: step must be positive");
  if (std::abs(t) > cfg.max_time) throw DomainError("flow: |t| exceeds max_time");
  Vector p = x0;
  check_inside(cfg, p, 0.0);
  if (path) path->push_back(p);
  if (t == 0.0) return p;
  const int n = step_count(t, cfg.h);
  const double h = t / n;
  for (int s = 0; s < n; ++s) {
    const Vector k1 = x.value(p);
    const Vector k2 = x.value(p + 0.5 * h * k1);
    const Vector k3 = x.value(p + 0.5 * h * k2);
    const Vector k4 = x.value(p + h * k3);
    p += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    check_inside(cfg, p, (s + 1) * h);
    if (path) path->push_back(p);
  }
  return p;
}

VariationalResult variational_flow(const VectorField& x, const Vector& x0, double t, const Vector& y0,
                                   const FlowConfig& cfg, std::vector<Vector>* path) {
  if (!(cfg.h > 0)) throw DomainError("variational flow: step must be positive");
  if (std::abs(t) > cfg.max_time) throw DomainError("variational flow: |t| exceeds max_time");
  Vector p = x0, y = y0;
  check_inside(cfg, p, 0.0);
  if (path) path->push_back(p);
  if (t == 0.0) return {p, y};
  const int n = step_count(t, cfg.h);
  const double h = t / n;
  auto rhs = [&](const Vector& q, const Vector& v, Vector& dq, Vector& dv) {
    dq = x.value(q);
    dv = jacobian_of(x, q, cfg.jacobian_mode) * v;
  };
  Vector a1, b1, a2, b2, a3, b3, a4, b4;
  for (int s = 0; s < n; ++s) {
    rhs(p, y, a1, b1);
    rhs(p + 0.5 * h * a1, y + 0.5 * h * b1, a2, b2);
    rhs(p + 0.5 * h * a2, y + 0.5 * h * b2, a3, b3);
    rhs(p + h * a3, y + h * b3, a4, b4);
    p += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
    y += h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4);
    check_inside(cfg, p, (s + 1) * h);
    if (path) path->push_back(p);
  }
  return {p, y};
}

std::size_t SurfacePatch::index(const std::vector<int>& node) const {
  std::size_t k = 0;
  for (int i = 0; i < m; ++i) k = k * res + node[i];
  return k;
}

std::string SurfacePatch::to_csv(const Matrix* defect) const {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < m; ++i) os << "t" << i + 1 << ",";
  for (int k = 0; k < dim; ++k) os << "p" << k << (k + 1 < dim || defect ? "," : "");
  if (defect)
    for (int i = 0; i < m; ++i) os << "defect" << i + 1 << (i + 1 < m ? "," : "");
  os << "\n";
  for (std::size_t n = 0; n < points.size(); ++n) {
    for (int i = 0; i < m; ++i) os << params[n][i] << ",";
    for (int k = 0; k < dim; ++k) os << points[n][k] << (k + 1 < dim || defect ? "," : "");
    if (defect)
      for (int i = 0; i < m; ++i) os << (*defect)(static_cast<Eigen::Index>(n), i) << (i + 1 < m ? "," : "");
    os << "\n";
  }
  return os.str();
}

namespace {

// Flows from `start` to every grid time, walking outward from t = 0 so each
// node reuses the previous one.
std::vector<Vector> sweep(const VectorField& x, const Vector& start, const std::vector<double>& nodes,
                          const FlowConfig& cfg) {
  std::vector<Vector> out(nodes.size());
  const int mid = static_cast<int>(nodes.size()) / 2;
  out[mid] = start;
  for (int dir : {1, -1}) {
    Vector p = start;
    double t = 0.0;
    for (int k = mid + dir; k >= 0 && k < static_cast<int>(nodes.size()); k += dir) {
      FlowConfig leg = cfg;
      try {
        p = flow(x, p, nodes[k] - t, leg);
      } catch (const EscapeError& e) {
        throw EscapeError(std::string(e.what()) + " (grid time " + std::to_string(nodes[k]) + ")", t + e.time);
      }
      t = nodes[k];
      out[k] = p;
    }
  }
  return out;
}

}  // namespace

SurfacePatch build_surface(std::shared_ptr<const GraphDistribution> d, const Vector& x0, double eps1, int res,
                           const FlowConfig& cfg, std::vector<int> order) {
  const int m = d->m();
  if (res < 3 || res % 2 == 0) throw DomainError("build_surface: grid resolution must be odd and >= 3");
  if (!(eps1 > 0)) throw DomainError("build_surface: eps1 must be positive");
  if (cfg.h > eps1 / 16 * (1 + 1e-12)) throw DomainError("build_surface: step h must not exceed eps1/16");
  if (order.empty())
    for (int i = 0; i < m; ++i) order.push_back(i);

  SurfacePatch s;
  s.m = m;
  s.dim = d->dim();
  s.res = res;
  s.eps1 = eps1;
  s.x0 = x0;
  s.order = order;
  std::vector<double> nodes(res);
  for (int k = 0; k < res; ++k) nodes[k] = eps1 * (2.0 * k - (res - 1)) / (res - 1);
  nodes[res / 2] = 0.0;

  std::vector<VectorField> fields;
  for (int i = 0; i < m; ++i) fields.push_back(VectorField::from_distribution(d, i));

  // Level l holds the points reached after applying order[0..l); entries are
  // indexed by the partial multi-index over those fields.
  std::vector<Vector> level{x0};
  for (int l = 0; l < m; ++l) {
    std::vector<Vector> next;
    next.reserve(level.size() * res);
    for (const auto& p : level) {
      auto swept = sweep(fields[order[l]], p, nodes, cfg);
      next.insert(next.end(), swept.begin(), swept.end());
    }
    level = std::move(next);
  }

  const std::size_t total = level.size();
  s.points.resize(total);
  s.params.resize(total);
  std::vector<int> by_order(m), node(m);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t r = flat;
    for (int l = m - 1; l >= 0; --l) {
      by_order[l] = static_cast<int>(r % res);
      r /= res;
    }
    for (int l = 0; l < m; ++l) node[order[l]] = by_order[l];
    const std::size_t k = s.index(node);
    s.points[k] = level[flat];
    s.params[k] = Vector(m);
    for (int i = 0; i < m; ++i) s.params[k][i] = nodes[node[i]];
  }

  const double dt = s.spacing();
  s.tangents.assign(total, Matrix(s.dim, m));
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    for (int i = m - 1; i >= 0; --i) {
      node[i] = static_cast<int>(r % res);
      r /= res;
    }
    for (int i = 0; i < m; ++i) {
      auto at = [&](int shift) {
        auto q = node;
        q[i] += shift;
        return s.points[s.index(q)];
      };
      Vector t;
      if (node[i] == 0) t = (-3 * at(0) + 4 * at(1) - at(2)) / (2 * dt);
      else if (node[i] == res - 1) t = (3 * at(0) - 4 * at(-1) + at(-2)) / (2 * dt);
      else t = (at(1) - at(-1)) / (2 * dt);
      s.tangents[k].col(i) = t;
    }
  }
  return s;
}

namespace {

Box bounding_box(const std::vector<Vector>& pts) {
  Vector lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return Box(lo, hi);
}

}  // namespace

DefectReport tangency_defect(const SurfacePatch& patch, std::shared_ptr<const GraphDistribution> d,
                             const Coframe& frame, const SamplingProtocol& proto, const std::vector<int>& y_axes) {
  DefectReport r;
  r.defect = Matrix(static_cast<Eigen::Index>(patch.points.size()), patch.m);
  for (std::size_t k = 0; k < patch.points.size(); ++k)
    for (int i = 0; i < patch.m; ++i) {
      const double v = (patch.tangents[k].col(i) - d->field(i, patch.points[k])).norm();
      r.defect(static_cast<Eigen::Index>(k), i) = v;
      r.max_defect = std::max(r.max_defect, v);
    }
  const RegionDiagnostics diag =
      diagnose_region(frame, plane_field(d), bounding_box(patch.points), proto, y_axes, patch.points);
  r.dA_on_E = diag.sup.dA_on_E;
  r.inverse_norm = diag.sup.inverse_norm;
  r.M = diag.sup.M;
  r.protocol = diag.protocol;
  const double me = patch.m * patch.eps1;
  r.rhs = me * r.dA_on_E * r.inverse_norm * std::exp(me * r.M);
  r.fd_tolerance = 10 * patch.spacing() * patch.spacing();
  r.margin = r.rhs + r.fd_tolerance - r.max_defect;
  return r;
}

PushforwardCheck pushforward_bound_check(std::shared_ptr<const GraphDistribution> d, const Coframe& frame,
                                         const Vector& x0, const std::vector<double>& times, const Vector& y0,
                                         const FlowConfig& cfg, const SamplingProtocol& proto,
                                         const std::vector<int>& y_axes) {
  if (static_cast<int>(times.size()) != d->m()) throw DomainError("pushforward check: need one time per field");
  std::vector<int> axes = y_axes;
  if (axes.empty())
    for (int j = 0; j < d->n(); ++j) axes.push_back(d->m() + j);
  Vector off = y0;
  for (int k : axes) off[k] = 0.0;
  if (off.norm() > 1e-12 * (1 + y0.norm())) throw DomainError("pushforward check: Y0 must lie in the transverse span");
  PushforwardCheck c;
  std::vector<Vector> path;
  std::vector<Vector> bases{x0};
  Vector p = x0, y = y0;
  for (int i = 0; i < d->m(); ++i) {
    const auto r = variational_flow(VectorField::from_distribution(d, i), p, times[i], y, cfg, &path);
    p = r.point;
    y = r.tangent;
    bases.push_back(p);
    c.eps1 = std::max(c.eps1, std::abs(times[i]));
  }
  c.lhs = y.norm();
  for (const auto& b : bases) c.frame_sup = std::max(c.frame_sup, (frame.values(b) * y0).norm());
  c.inverse_norm = restricted_inverse(frame, p, y_axes).norm;
  const RegionDiagnostics diag = diagnose_region(frame, plane_field(d), bounding_box(path), proto, y_axes, path);
  c.M = diag.sup.M;
  c.rhs = c.frame_sup * c.inverse_norm * std::exp(d->m() * c.eps1 * c.M);
  c.pass = c.lhs <= c.rhs * (1 + 1e-3);
  return c;
}

std::string to_string(ConvergenceVerdict v) {
  switch (v) {
    case ConvergenceVerdict::Converged:
      return "Converged";
    case ConvergenceVerdict::NotConverged:
      return "NotConverged";
    case ConvergenceVerdict::Inconclusive:
      return "Inconclusive";
  }
  return "";
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# verdict=" << to_string(verdict) << " angle_tolerance=" << angle_tolerance << "\n";
  os << "k,displacement,angle\n";
  for (std::size_t k = 0; k < angle.size(); ++k) {
    os << k << ",";
    if (k > 0) os << displacement[k - 1];
    os << "," << angle[k] << "\n";
  }
  return os.str();
}

ConvergenceReport converge_surfaces(const std::vector<SurfacePatch>& patches, const std::vector<PlaneField>& e,
                                    double angle_tolerance) {
  if (patches.empty()) throw DomainError("converge_surfaces: no patches");
  if (e.size() != 1 && e.size() != patches.size())
    throw DomainError("converge_surfaces: need one plane field or one per patch");
  const SurfacePatch& first = patches.front();
  for (const auto& p : patches)
    if (p.res != first.res || p.m != first.m || p.eps1 != first.eps1 || p.x0 != first.x0)
      throw DomainError("converge_surfaces: patches do not share basepoint, eps1 and grid");

  ConvergenceReport r;
  r.angle_tolerance = angle_tolerance;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const PlaneField& ek = e.size() == 1 ? e[0] : e[k];
    double worst = 0.0;
    for (std::size_t n = 0; n < patches[k].points.size(); ++n)
      worst = std::max(worst, subspace_angle(orthonormalize(patches[k].tangents[n]), orthonormalize(ek(patches[k].points[n]))));
    r.angle.push_back(worst);
    if (k > 0) {
      double disp = 0.0;
      for (std::size_t n = 0; n < patches[k].points.size(); ++n)
        disp = std::max(disp, (patches[k].points[n] - patches[k - 1].points[n]).norm());
      r.displacement.push_back(disp);
    }
  }

  const bool settled = r.displacement.empty() || r.displacement.back() <= 1e-12 ||
                       r.displacement.front() >= 10 * r.displacement.back();
  const bool aligned = r.angle.back() <= angle_tolerance;
  const bool angle_decaying = r.angle.back() * 10 <= r.angle.front();
  if (settled && aligned) r.verdict = ConvergenceVerdict::Converged;
  else if (!aligned && !angle_decaying) r.verdict = ConvergenceVerdict::NotConverged;
  else r.verdict = ConvergenceVerdict::Inconclusive;
  return r;
}

double order_sensitivity(std::shared_ptr<const GraphDistribution> d, const Vector& x0, double eps1, int res,
                         const FlowConfig& cfg) {
  std::vector<int> reversed;
  for (int i = d->m() - 1; i >= 0; --i) reversed.push_back(i);
  const SurfacePatch a = build_surface(d, x0, eps1, res, cfg);
  const SurfacePatch b = build_surface(d, x0, eps1, res, cfg, reversed);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.points.size(); ++k) worst = std::max(worst, (a.points[k] - b.points[k]).norm());
  return worst;
}

}  // namespace frob
