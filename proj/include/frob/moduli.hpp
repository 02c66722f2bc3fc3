#pragma once

#include "frob/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace frob {

enum class ModulusKind { Lipschitz, Hoelder, LogLip, Sum, Scale, Max, Tabulated };

// Modulus of continuity as a closed algebraic family. Values are immutable
// and cheap to copy (shared structure).
class Modulus {
 public:
  static Modulus lipschitz(double K, double cap = 1.0);
  static Modulus hoelder(double alpha, double K = 1.0, double cap = 1.0);
  // s ↦ −Kβ·s·log s, valid up to 1/e where it is increasing.
  static Modulus loglip(double beta, double K = 1.0, double cap = -1.0);
  static Modulus sum(const Modulus& a, const Modulus& b);
  static Modulus scale(double c, const Modulus& w);
  static Modulus max(const Modulus& a, const Modulus& b);
  static Modulus tabulated(std::vector<std::pair<double, double>> breakpoints);

  double operator()(double s) const { return eval(s); }
  double eval(double s) const;

  ModulusKind kind() const;
  double domain_cap() const;
  // Smallest scale at which the modulus carries information (first
  // breakpoint of tabulated data, 0 for closed forms).
  double resolution() const;
  double param(int i) const;  // K / c, then α / β
  const std::vector<Modulus>& children() const;
  const std::vector<std::pair<double, double>>& breakpoints() const;

  std::string serialize() const;
  static Modulus parse(std::string_view text);

 private:
  struct Impl;
  explicit Modulus(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

Modulus algebra_sum(const Modulus& wf, const Modulus& wg);
Modulus algebra_product(const Modulus& wf, const Modulus& wg, double K);
Modulus algebra_quotient(const Modulus& wf, const Modulus& wg, double K, double c);

enum class Criterion { Osgood, LimitCondition };
enum class Verdict { Holds, Fails, Inconclusive };

std::string to_string(Criterion c);
std::string to_string(Verdict v);

struct TracePoint {
  double scale = 0.0;
  double value = 0.0;
  double log_value = 0.0;
};

struct CriterionReport {
  Criterion criterion = Criterion::Osgood;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<TracePoint> trace;
  std::vector<std::pair<std::string, std::string>> parameters;

  // Least-squares slope of log value against log scale over [s_lo, s_hi].
  double fitted_slope(double s_lo, double s_hi) const;
  std::string to_csv() const;
};

// Verdict thresholds; recorded in every report.
struct CriterionThresholds {
  double divergence_cap = 1e6;
  double stabilization = 1e-6;
  double decay_factor = 1e-3;
  double geometric_spread = 0.02;
  double geometric_ratio = 0.95;
};

CriterionReport osgood_check(const Modulus& w, double eps, int depth,
                             const CriterionThresholds& th = {});

std::vector<double> geometric_grid(double s_max, double s_min, int points);

CriterionReport limit_condition_check(const Modulus& w1, const Modulus& w2,
                                      const std::vector<double>& grid = {},
                                      const CriterionThresholds& th = {});

struct Sample {
  Vector point;
  double value = 0.0;
};

// Empirical modulus from scattered samples; pairs count only when their
// displacement is supported on the masked coordinates.
Modulus estimate_modulus(const std::vector<Sample>& samples, std::uint64_t direction_mask,
                         int buckets = 24);

// Smallest K·s^a dominating a tabulated modulus, with a from a log-log fit of
// its breakpoints (clamped to (0, 1]); a ≥ 0.95 is reported as Lipschitz.
// Extends an estimate below its sampling resolution.
Modulus fit_closed_form(const Modulus& tabulated);

}  // namespace frob
