#include "frob/odelab.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace frob {

OdeSpec OdeSpec::parse(const std::vector<std::string>& names, const std::vector<std::string>& comps, Box domain) {
  if (names.size() != comps.size() + 1) throw DomainError("ode: need names (t, y1..yn) for n components");
  if (domain.dim() != static_cast<int>(names.size())) throw DomainError("ode: domain dimension mismatch");
  OdeSpec s;
  s.F = parse_vector(comps, names);
  s.domain = std::move(domain);
  return s;
}

ExprVector extend(const OdeSpec& spec) {
  std::vector<Expr> c{Expr(1.0)};
  for (const auto& e : spec.F.comps()) c.push_back(e);
  return ExprVector(spec.F.names(), c);
}

Modulus estimate_field_modulus(const std::vector<Expr>& comps, const Box& domain, int per_axis, std::uint64_t mask) {
  if (per_axis <= 0) per_axis = std::max(5, static_cast<int>(std::pow(2000.0, 1.0 / domain.dim())));
  const auto pts = lattice(domain, per_axis);
  std::vector<Modulus> parts;
  for (const auto& e : comps) {
    if (e.is_constant()) continue;
    std::vector<Sample> samples(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) samples[k] = {pts[k], e.eval(pts[k])};
    parts.push_back(estimate_modulus(samples, mask));
  }
  if (parts.empty()) return Modulus::lipschitz(0.0);
  if (parts.size() == 1) return parts.front();
  // One tabulated envelope over the union of breakpoints.
  std::vector<double> scales;
  for (const auto& w : parts)
    for (const auto& bp : w.breakpoints()) scales.push_back(bp.first);
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  std::vector<std::pair<double, double>> bp;
  for (double s : scales) {
    double v = 0.0;
    for (const auto& w : parts) v = std::max(v, w(std::min(s, w.domain_cap())));
    bp.emplace_back(s, v);
  }
  return Modulus::tabulated(std::move(bp));
}

namespace {

Modulus estimated(const OdeSpec& spec, std::uint64_t mask) {
  return estimate_field_modulus(spec.F.comps(), spec.domain, spec.lattice, mask);
}

}  // namespace

Modulus ode_modulus(const OdeSpec& spec, std::uint64_t mask, bool* declared) {
  for (const auto& d : spec.moduli)
    if (d.mask == mask) {
      if (declared) *declared = true;
      return d.w;
    }
  if (declared) *declared = false;
  return fit_closed_form(estimated(spec, mask));
}

double declared_moduli_ratio(const OdeSpec& spec) {
  double worst = 0.0;
  for (const auto& d : spec.moduli) {
    const Modulus est = estimated(spec, d.mask);
    for (const auto& [s, v] : est.breakpoints()) {
      if (s > d.w.domain_cap()) break;
      const double w = d.w(s);
      if (v > 0 && w > 0) worst = std::max(worst, v / w);
      else if (v > 0) worst = INFINITY;
    }
  }
  return worst;
}

std::string Theorem1Certificate::to_csv(const std::vector<std::string>& names) const {
  std::ostringstream os;
  os.precision(17);
  os << "# theorem1 index=" << names.at(index) << " component=" << component << " w1=" << w1.serialize()
     << (w1_declared ? " (declared)" : " (estimated)") << " w2=" << w2.serialize()
     << (w2_declared ? " (declared)" : " (estimated)") << " verdict=" << to_string(verdict) << "\n";
  os << report.to_csv();
  return os.str();
}

Theorem1Certificate theorem1_check(const OdeSpec& spec, const Vector& xi, const CriterionThresholds& th) {
  if (!spec.domain.contains(xi, 1e-12)) throw DomainError("theorem1_check: point outside the domain");
  const Vector v = extend(spec).eval(xi);
  int best = -1;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= 1e-9) continue;
    // Ties go to the later coordinate so a spatial component wins over t.
    if (best < 0 || std::abs(v[i]) >= std::abs(v[best]) * (1 - 1e-12)) best = i;
  }
  if (best < 0) throw DomainError("theorem1_check: extended field vanishes");

  Theorem1Certificate c;
  c.index = best;
  c.component = v[best];
  c.w1 = ode_modulus(spec, spec.all_mask(), &c.w1_declared);
  c.w2 = ode_modulus(spec, spec.all_mask() & ~(std::uint64_t{1} << best), &c.w2_declared);
  c.report = limit_condition_check(c.w1, c.w2, {}, th);
  c.report.parameters.emplace_back("index", spec.F.names()[best]);
  c.verdict = c.report.verdict;
  return c;
}

std::string to_string(FunnelVerdict v) {
  switch (v) {
    case FunnelVerdict::UniqueLike:
      return "UniqueLike";
    case FunnelVerdict::FunnelDetected:
      return "FunnelDetected";
    case FunnelVerdict::Inconclusive:
      return "Inconclusive";
  }
  return "";
}

std::string FunnelReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# funnel T=" << T << " exponent=" << exponent << " verdict=" << to_string(verdict) << " basepoint=";
  for (int k = 0; k < basepoint.size(); ++k) os << (k ? ";" : "") << basepoint[k];
  os << "\ndelta,dispersion,failures\n";
  for (std::size_t k = 0; k < deltas.size(); ++k) os << deltas[k] << "," << dispersion[k] << "," << failures[k] << "\n";
  return os.str();
}

FunnelReport funnel(const OdeSpec& spec, const Vector& xi0, const FunnelConfig& cfg) {
  if (cfg.deltas.empty()) throw DomainError("funnel: empty delta list");
  for (std::size_t k = 1; k < cfg.deltas.size(); ++k)
    if (!(cfg.deltas[k] < cfg.deltas[k - 1])) throw DomainError("funnel: delta list must be strictly descending");
  const int n = spec.n();
  const VectorField base = VectorField::from_expr(extend(spec));
  FlowConfig fc = cfg.flow;
  fc.domain = spec.domain;
  fc.max_time = std::max(fc.max_time, cfg.T);

  // The unperturbed run must stay inside V.
  const Vector center = flow(base, xi0, cfg.T, fc);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g;
  std::vector<Vector> dirs(cfg.initial_probe ? cfg.ensemble : 0);
  for (auto& d : dirs) {
    d = Vector(n);
    for (int j = 0; j < n; ++j) d[j] = g(rng);
    d.normalize();
  }

  FunnelReport r;
  r.basepoint = xi0;
  r.T = cfg.T;
  r.deltas = cfg.deltas;
  for (double delta : cfg.deltas) {
    std::vector<Vector> ends{center.tail(n)};
    int failed = 0;
    auto attempt = [&](const VectorField& f, const Vector& start) {
      try {
        ends.push_back(flow(f, start, cfg.T, fc).tail(n));
      } catch (const EscapeError&) {
        ++failed;
      } catch (const DomainError&) {
        ++failed;
      }
    };
    for (const auto& d : dirs) {
      Vector p = xi0;
      p.tail(n) += delta * d;
      for (int k = 1; k <= n; ++k) {
        if (p[k] < spec.domain.lo[k]) p[k] = 2 * spec.domain.lo[k] - p[k];
        if (p[k] > spec.domain.hi[k]) p[k] = 2 * spec.domain.hi[k] - p[k];
      }
      attempt(base, p);
    }
    if (cfg.field_probe)
      for (double sign : {1.0, -1.0}) {
        VectorField f = base;
        const double off = sign * delta;
        f.value = [base, off](const Vector& p) {
          Vector v = base.value(p);
          v.tail(v.size() - 1).array() += off;
          return v;
        };
        attempt(f, xi0);
      }
    double spread = 0.0;
    for (std::size_t a = 0; a < ends.size(); ++a)
      for (std::size_t b = a + 1; b < ends.size(); ++b) spread = std::max(spread, (ends[a] - ends[b]).norm());
    r.dispersion.push_back(spread);
    r.failures.push_back(failed);
  }

  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < r.deltas.size(); ++k)
    if (r.dispersion[k] > 0) {
      lx.push_back(std::log(r.deltas[k]));
      ly.push_back(std::log(r.dispersion[k]));
    }
  const double d_min = r.dispersion.back(), delta_min = r.deltas.back();
  if (lx.empty()) {
    r.exponent = INFINITY;  // no spread at any δ
    r.verdict = FunnelVerdict::UniqueLike;
    return r;
  }
  r.exponent = lx.size() >= 2 ? fit_line(lx, ly).slope : 0.0;
  if (lx.size() >= 2 && r.exponent >= 0.9) r.verdict = FunnelVerdict::UniqueLike;
  else if (d_min > 1e3 * delta_min && r.exponent < 0.5) r.verdict = FunnelVerdict::FunnelDetected;
  else r.verdict = FunnelVerdict::Inconclusive;
  return r;
}

OdeSpec example1(double alpha, double beta, double gamma, double delta) {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  OdeSpec s = OdeSpec::parse({"t", "x", "y"},
                             {"-t*log(t^" + num(beta) + ") - x*log(x^" + num(gamma) + ")",
                              "1 + y^" + num(alpha) + " - x*log(x^" + num(delta) + ")"},
                             Box::cube(3, 0, 1));
  const double sigma = std::max({beta, gamma, delta});
  s.moduli.push_back({s.all_mask(), Modulus::hoelder(alpha, 1.0)});
  s.moduli.push_back({0b011, Modulus::loglip(sigma, 1.0)});
  return s;
}

OdeSpec peano() {
  OdeSpec s = OdeSpec::parse({"t", "y"}, {"abs(y)^(2/3)"}, Box(Vector{{0.0, -1.0}}, Vector{{2.0, 1.0}}));
  s.moduli.push_back({0b11, Modulus::hoelder(2.0 / 3.0)});
  s.moduli.push_back({0b10, Modulus::hoelder(2.0 / 3.0)});
  return s;
}

}  // namespace frob
