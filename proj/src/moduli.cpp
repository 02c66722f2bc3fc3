#include "frob/moduli.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace frob {

struct Modulus::Impl {
  ModulusKind kind;
  double a = 0.0;  // K for closed forms, c for Scale
  double b = 0.0;  // α or β
  double cap = 1.0;
  double resolution = 0.0;
  std::vector<Modulus> kids;
  std::vector<std::pair<double, double>> table;
};

namespace {

constexpr double kInvE = 0.36787944117144233;

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(std::string("modulus: ") + what);
}

}  // namespace

Modulus Modulus::lipschitz(double K, double cap) {
  require(K >= 0 && cap > 0, "Lipschitz needs K >= 0 and a positive cap");
  return Modulus(std::make_shared<Impl>(Impl{ModulusKind::Lipschitz, K, 0.0, cap, 0.0, {}, {}}));
}

Modulus Modulus::hoelder(double alpha, double K, double cap) {
  require(alpha > 0 && alpha <= 1 && K >= 0 && cap > 0, "Hoelder needs 0 < alpha <= 1, K >= 0");
  return Modulus(std::make_shared<Impl>(Impl{ModulusKind::Hoelder, K, alpha, cap, 0.0, {}, {}}));
}

Modulus Modulus::loglip(double beta, double K, double cap) {
  if (cap <= 0) cap = kInvE;
  require(beta > 0 && K >= 0 && cap <= kInvE * (1 + 1e-15), "LogLip needs beta > 0, K >= 0, cap <= 1/e");
  return Modulus(std::make_shared<Impl>(Impl{ModulusKind::LogLip, K, beta, cap, 0.0, {}, {}}));
}

Modulus Modulus::sum(const Modulus& x, const Modulus& y) {
  return Modulus(std::make_shared<Impl>(Impl{ModulusKind::Sum, 0.0, 0.0, std::min(x.domain_cap(), y.domain_cap()),
                                              std::max(x.resolution(), y.resolution()), {x, y}, {}}));
}

Modulus Modulus::scale(double c, const Modulus& w) {
  require(c >= 0, "Scale needs a nonnegative constant");
  return Modulus(std::make_shared<Impl>(Impl{ModulusKind::Scale, c, 0.0, w.domain_cap(), w.resolution(), {w}, {}}));
}

Modulus Modulus::max(const Modulus& x, const Modulus& y) {
  return Modulus(std::make_shared<Impl>(Impl{ModulusKind::Max, 0.0, 0.0, std::min(x.domain_cap(), y.domain_cap()),
                                              std::max(x.resolution(), y.resolution()), {x, y}, {}}));
}

Modulus Modulus::tabulated(std::vector<std::pair<double, double>> bp) {
  require(!bp.empty(), "Tabulated needs at least one breakpoint");
  for (std::size_t i = 0; i < bp.size(); ++i) {
    require(bp[i].first > 0 && bp[i].second >= 0, "Tabulated breakpoints must be positive");
    if (i > 0) {
      require(bp[i].first > bp[i - 1].first, "Tabulated scales must be strictly ascending");
      require(bp[i].second >= bp[i - 1].second, "Tabulated values must be nondecreasing");
    }
  }
  const double cap = bp.back().first;
  const double res = bp.front().first;
  return Modulus(std::make_shared<Impl>(Impl{ModulusKind::Tabulated, 0.0, 0.0, cap, res, {}, std::move(bp)}));
}

double Modulus::eval(double s) const {
  const Impl& m = *impl_;
  if (s < 0 || s > m.cap * (1 + 1e-12) || std::isnan(s))
    throw DomainError("modulus: scale " + num(s) + " outside [0, " + num(m.cap) + "]");
  if (s == 0) return 0.0;
  switch (m.kind) {
    case ModulusKind::Lipschitz:
      return m.a * s;
    case ModulusKind::Hoelder:
      return m.a * std::pow(s, m.b);
    case ModulusKind::LogLip:
      return -m.a * m.b * s * std::log(s);
    case ModulusKind::Sum:
      return m.kids[0].eval(s) + m.kids[1].eval(s);
    case ModulusKind::Scale:
      return m.a * m.kids[0].eval(s);
    case ModulusKind::Max:
      return std::max(m.kids[0].eval(s), m.kids[1].eval(s));
    case ModulusKind::Tabulated: {
      const auto& t = m.table;
      if (s <= t.front().first) return t.front().second * s / t.front().first;
      auto it = std::lower_bound(t.begin(), t.end(), s, [](const auto& p, double v) { return p.first < v; });
      if (it == t.end()) return t.back().second;
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double f = (s - lo.first) / (hi.first - lo.first);
      return lo.second + f * (hi.second - lo.second);
    }
  }
  return 0.0;
}

ModulusKind Modulus::kind() const { return impl_->kind; }
double Modulus::domain_cap() const { return impl_->cap; }
double Modulus::resolution() const { return impl_->resolution; }
double Modulus::param(int i) const { return i == 0 ? impl_->a : impl_->b; }
const std::vector<Modulus>& Modulus::children() const { return impl_->kids; }
const std::vector<std::pair<double, double>>& Modulus::breakpoints() const { return impl_->table; }

std::string Modulus::serialize() const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case ModulusKind::Lipschitz:
      return "lipschitz(K=" + num(m.a) + ",cap=" + num(m.cap) + ")";
    case ModulusKind::Hoelder:
      return "hoelder(alpha=" + num(m.b) + ",K=" + num(m.a) + ",cap=" + num(m.cap) + ")";
    case ModulusKind::LogLip:
      return "loglip(beta=" + num(m.b) + ",K=" + num(m.a) + ",cap=" + num(m.cap) + ")";
    case ModulusKind::Sum:
      return "sum(" + m.kids[0].serialize() + "," + m.kids[1].serialize() + ")";
    case ModulusKind::Scale:
      return "scale(c=" + num(m.a) + "," + m.kids[0].serialize() + ")";
    case ModulusKind::Max:
      return "max(" + m.kids[0].serialize() + "," + m.kids[1].serialize() + ")";
    case ModulusKind::Tabulated: {
      std::string s = "tabulated(";
      for (std::size_t i = 0; i < m.table.size(); ++i)
        s += (i ? ";" : "") + num(m.table[i].first) + ":" + num(m.table[i].second);
      return s + ")";
    }
  }
  return "";
}

namespace {

class ModulusParser {
 public:
  explicit ModulusParser(std::string_view s) : s_(s) {}

  Modulus parse_all() {
    Modulus m = parse();
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
    return m;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("modulus: " + msg, 1, static_cast<int>(pos_) + 1);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  std::string word() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected a name");
    std::string w(s_.substr(start, pos_ - start));
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
    return w;
  }
  double number() {
    skip();
    const char* begin = s_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  // key=value list; keys are case-insensitive except K.
  std::vector<std::pair<std::string, double>> kv_list() {
    std::vector<std::pair<std::string, double>> out;
    if (peek(')')) return out;
    while (true) {
      std::string k = word();
      expect('=');
      out.emplace_back(k, number());
      if (!peek(',')) break;
      expect(',');
    }
    return out;
  }

  static double get(const std::vector<std::pair<std::string, double>>& kv, const std::string& key, double dflt) {
    for (const auto& [k, v] : kv)
      if (k == key) return v;
    return dflt;
  }

  Modulus parse() {
    const std::string kind = word();
    expect('(');
    Modulus out = Modulus::lipschitz(1.0);
    if (kind == "lipschitz") {
      auto kv = kv_list();
      out = Modulus::lipschitz(get(kv, "k", 1.0), get(kv, "cap", 1.0));
    } else if (kind == "hoelder" || kind == "holder") {
      auto kv = kv_list();
      out = Modulus::hoelder(get(kv, "alpha", 0.5), get(kv, "k", 1.0), get(kv, "cap", 1.0));
    } else if (kind == "loglip") {
      auto kv = kv_list();
      out = Modulus::loglip(get(kv, "beta", 1.0), get(kv, "k", 1.0), get(kv, "cap", -1.0));
    } else if (kind == "sum" || kind == "max") {
      Modulus a = parse();
      expect(',');
      Modulus b = parse();
      out = kind == "sum" ? Modulus::sum(a, b) : Modulus::max(a, b);
    } else if (kind == "scale") {
      const std::string key = word();
      if (key != "c") fail("scale expects c=");
      expect('=');
      const double c = number();
      expect(',');
      out = Modulus::scale(c, parse());
    } else if (kind == "tabulated") {
      std::vector<std::pair<double, double>> bp;
      while (!peek(')')) {
        const double s = number();
        expect(':');
        bp.emplace_back(s, number());
        if (!peek(';')) break;
        expect(';');
      }
      out = Modulus::tabulated(std::move(bp));
    } else {
      fail("unknown modulus kind '" + kind + "'");
    }
    expect(')');
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Modulus Modulus::parse(std::string_view text) { return ModulusParser(text).parse_all(); }

Modulus algebra_sum(const Modulus& wf, const Modulus& wg) { return Modulus::sum(wf, wg); }

Modulus algebra_product(const Modulus& wf, const Modulus& wg, double K) {
  if (!(K >= 0 && std::isfinite(K))) throw DomainError("modulus product: bound K must be finite");
  return Modulus::scale(K, Modulus::sum(wf, wg));
}

Modulus algebra_quotient(const Modulus& wf, const Modulus& wg, double K, double c) {
  if (!(c > 0)) throw DomainError("modulus quotient: denominator infimum must be positive");
  if (!(K >= 0 && std::isfinite(K))) throw DomainError("modulus quotient: bound K must be finite");
  return Modulus::scale(K, Modulus::sum(wf, Modulus::scale(1.0 / (c * c), wg)));
}

std::string to_string(Criterion c) { return c == Criterion::Osgood ? "Osgood" : "LimitCondition"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "Holds";
    case Verdict::Fails:
      return "Fails";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "";
}

double CriterionReport::fitted_slope(double s_lo, double s_hi) const {
  std::vector<double> x, y;
  for (const auto& t : trace)
    if (t.scale >= s_lo * (1 - 1e-12) && t.scale <= s_hi * (1 + 1e-12) && std::isfinite(t.log_value)) {
      x.push_back(std::log(t.scale));
      y.push_back(t.log_value);
    }
  return fit_line(x, y).slope;
}

std::string CriterionReport::to_csv() const {
  std::ostringstream os;
  os << "# criterion=" << to_string(criterion) << " verdict=" << to_string(verdict);
  for (const auto& [k, v] : parameters) os << " " << k << "=" << v;
  os << "\n";
  os << "scale,value,log_value\n";
  os.precision(17);
  for (const auto& t : trace) os << t.scale << "," << t.value << "," << t.log_value << "\n";
  return os.str();
}

namespace {

double integrate_inverse(const Modulus& w, double a, double b) {
  auto f = [&](double s) {
    const double v = w.eval(s);
    if (!(v > 0)) throw SingularIntegrandError("osgood: modulus vanishes at interior scale " + num(s));
    return 1.0 / v;
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13, &err);
}

void add_thresholds(CriterionReport& r, const CriterionThresholds& th) {
  r.parameters.emplace_back("divergence_cap", num(th.divergence_cap));
  r.parameters.emplace_back("stabilization", num(th.stabilization));
  r.parameters.emplace_back("decay_factor", num(th.decay_factor));
}

}  // namespace

CriterionReport osgood_check(const Modulus& w, double eps, int depth, const CriterionThresholds& th) {
  if (!(eps > 0 && eps <= w.domain_cap() * (1 + 1e-12))) throw DomainError("osgood: eps must lie in (0, domain_cap]");
  if (depth < 8) throw DomainError("osgood: depth must be at least 8");

  CriterionReport r;
  r.criterion = Criterion::Osgood;
  std::vector<double> inc;
  double partial = 0.0;
  double upper = eps;
  for (int k = 1; k <= depth; ++k) {
    const double lower = eps * std::ldexp(1.0, -k);
    const double piece = integrate_inverse(w, lower, upper);
    inc.push_back(piece);
    partial += piece;
    r.trace.push_back({lower, partial, std::log(partial)});
    upper = lower;
  }

  std::vector<double> ratio;
  for (std::size_t k = 1; k < inc.size(); ++k) ratio.push_back(inc[k] / inc[k - 1]);
  const std::size_t tail_n = std::max<std::size_t>(3, ratio.size() / 2);
  const std::vector<double> tail(ratio.end() - static_cast<long>(std::min(tail_n, ratio.size())), ratio.end());
  const auto [lo_it, hi_it] = std::minmax_element(tail.begin(), tail.end());
  double mean = 0.0;
  for (double v : tail) mean += v;
  mean /= tail.size();
  bool nondecreasing = true;
  for (std::size_t i = 1; i < tail.size(); ++i) nondecreasing = nondecreasing && tail[i] >= tail[i - 1] - 1e-12;

  const double remainder = mean < 1 ? inc.back() * mean / (1 - mean) : std::numeric_limits<double>::infinity();
  const bool geometric = (*hi_it - *lo_it) <= th.geometric_spread && mean < th.geometric_ratio;
  if (partial > th.divergence_cap) {
    r.verdict = Verdict::Holds;
  } else if (geometric) {
    r.verdict = Verdict::Fails;
  } else if (*lo_it >= th.geometric_ratio || nondecreasing) {
    r.verdict = Verdict::Holds;
  } else {
    r.verdict = Verdict::Inconclusive;
  }

  r.parameters.emplace_back("modulus", w.serialize());
  r.parameters.emplace_back("eps", num(eps));
  r.parameters.emplace_back("depth", std::to_string(depth));
  add_thresholds(r, th);
  r.parameters.emplace_back("tail_ratio", num(mean));
  r.parameters.emplace_back("stabilized", remainder <= th.stabilization * partial ? "yes" : "no");
  r.parameters.emplace_back("convention", "divergent_integral_means_Holds_(printed_'<inf'_sign_treated_as_misprint)");
  if (eps * std::ldexp(1.0, -depth) < w.resolution())
    r.parameters.emplace_back("warning", "probes_below_tabulated_resolution");
  return r;
}

std::vector<double> geometric_grid(double s_max, double s_min, int points) {
  if (!(s_max > s_min && s_min > 0 && points >= 2)) throw DomainError("geometric_grid: need s_max > s_min > 0");
  std::vector<double> g(points);
  const double step = std::log(s_min / s_max) / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = s_max * std::exp(step * i);
  g.back() = s_min;
  return g;
}

CriterionReport limit_condition_check(const Modulus& w1, const Modulus& w2, const std::vector<double>& grid_in,
                                      const CriterionThresholds& th) {
  const double cap = std::min(w1.domain_cap(), w2.domain_cap());
  const double floor_scale = std::max({1e-12, w1.resolution(), w2.resolution()});
  std::vector<double> grid = grid_in;
  if (grid.empty()) grid = geometric_grid(cap, floor_scale, 61);
  if (grid.size() < 20) throw DomainError("limit condition: grid needs at least 20 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0 && grid[i] <= cap * (1 + 1e-12))) throw DomainError("limit condition: grid outside (0, cap]");
    if (i > 0 && !(grid[i] < grid[i - 1])) throw DomainError("limit condition: grid must be descending");
  }

  CriterionReport r;
  r.criterion = Criterion::LimitCondition;
  for (double s : grid) {
    const double a = w1.eval(s);
    const double lq = (a > 0 ? std::log(a) : -std::numeric_limits<double>::infinity()) + w2.eval(s) / s;
    r.trace.push_back({s, std::exp(lq), lq});
  }

  const std::size_t n = r.trace.size();
  const std::size_t tail = std::max<std::size_t>(3, n / 3);
  int ups = 0, downs = 0;
  for (std::size_t i = n - tail; i < n; ++i) {
    const double d = r.trace[i].log_value - r.trace[i - 1].log_value;
    if (d > 0) ++ups;
    else if (d < 0) ++downs;
  }
  const bool decayed = r.trace.back().log_value < r.trace.front().log_value + std::log(th.decay_factor);
  const bool vanishing = std::all_of(r.trace.begin(), r.trace.end(), [](const TracePoint& t) { return t.value == 0.0; });
  if (vanishing) {
    r.verdict = Verdict::Holds;  // w1 ≡ 0
  } else if (ups == 0 && downs > 0) {
    r.verdict = decayed ? Verdict::Holds : Verdict::Fails;
  } else if (downs == 0) {
    r.verdict = Verdict::Fails;
  } else {
    r.verdict = Verdict::Inconclusive;
  }
  r.parameters.emplace_back("w1", w1.serialize());
  r.parameters.emplace_back("w2", w2.serialize());
  r.parameters.emplace_back("grid_points", std::to_string(n));
  r.parameters.emplace_back("s_min", num(grid.back()));
  add_thresholds(r, th);
  return r;
}

Modulus estimate_modulus(const std::vector<Sample>& samples, std::uint64_t mask, int buckets) {
  if (samples.size() < 100) throw InsufficientDataError("estimate_modulus: need at least 100 samples");
  const int d = static_cast<int>(samples.front().point.size());
  double extent = 0.0;
  for (const auto& s : samples) extent = std::max(extent, s.point.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * (1.0 + extent);

  std::vector<std::pair<double, double>> pairs;  // (distance, |Δf|)
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const Vector diff = samples[i].point - samples[j].point;
      bool ok = true;
      for (int c = 0; c < d && ok; ++c)
        if (!(mask >> c & 1u) && std::abs(diff[c]) > tol) ok = false;
      if (!ok) continue;
      const double dist = diff.norm();
      if (dist <= tol) continue;
      pairs.emplace_back(dist, std::abs(samples[i].value - samples[j].value));
    }
  if (pairs.size() < 2) throw InsufficientDataError("estimate_modulus: fewer than 2 sample pairs along the mask");
  std::sort(pairs.begin(), pairs.end());

  // Bucket scales are realized pair distances nearest below geometric targets,
  // so lattice data is not penalized between lattice spacings.
  std::vector<double> distinct;
  for (const auto& p : pairs)
    if (distinct.empty() || p.first > distinct.back() * (1 + 1e-9)) distinct.push_back(p.first);
  const double dmin = distinct.front(), dmax = distinct.back();
  std::vector<double> scales;
  for (int b = 0; b < buckets; ++b) {
    const double target = buckets == 1 ? dmax : dmin * std::pow(dmax / dmin, static_cast<double>(b) / (buckets - 1));
    auto it = std::upper_bound(distinct.begin(), distinct.end(), target * (1 + 1e-9));
    const double s = *(it - 1);
    if (scales.empty() || s > scales.back()) scales.push_back(s);
  }

  std::vector<std::pair<double, double>> bp;
  double running = 0.0;
  std::size_t k = 0;
  for (double s : scales) {
    while (k < pairs.size() && pairs[k].first <= s * (1 + 1e-9)) running = std::max(running, pairs[k++].second);
    bp.emplace_back(s, running);
  }
  return Modulus::tabulated(std::move(bp));
}

Modulus fit_closed_form(const Modulus& w) {
  if (w.kind() != ModulusKind::Tabulated) return w;
  std::vector<double> lx, ly;
  double top = 0.0;
  for (const auto& [s, v] : w.breakpoints())
    if (v > 0) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(v));
      top = std::max(top, s);
    }
  if (lx.empty()) return Modulus::lipschitz(0.0);
  double a = lx.size() >= 2 ? fit_line(lx, ly).slope : 1.0;
  a = std::clamp(a, 1e-3, 1.0);
  if (a >= 0.95) a = 1.0;
  double K = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) K = std::max(K, std::exp(ly[i] - a * lx[i]));
  const double cap = std::max(top, 1.0);
  return a == 1.0 ? Modulus::lipschitz(K, cap) : Modulus::hoelder(a, K, cap);
}

}  // namespace frob
