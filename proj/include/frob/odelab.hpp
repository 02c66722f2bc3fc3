#pragma once

#include "frob/moduli.hpp"
#include "frob/surface.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace frob {

// A modulus claimed for F̃ with respect to the coordinates set in `mask`
// (bit 0 is t).
struct DeclaredModulus {
  std::uint64_t mask = 0;
  Modulus w = Modulus::lipschitz(0.0);
};

// dy/dt = F(t, y) over ξ = (t, y¹..yⁿ).
struct OdeSpec {
  ExprVector F;  // n components over names (t, y…)
  Box domain;
  std::vector<DeclaredModulus> moduli;
  int lattice = 0;  // per-axis samples for estimated moduli; 0 picks ~2000 points

  static OdeSpec parse(const std::vector<std::string>& names, const std::vector<std::string>& comps, Box domain);
  int n() const { return F.size(); }
  int dim() const { return F.dim(); }
  std::uint64_t all_mask() const { return (std::uint64_t{1} << dim()) - 1; }
};

// Max over the non-constant components of lattice estimates (tabulated).
// per_axis = 0 picks about 2000 lattice points.
Modulus estimate_field_modulus(const std::vector<Expr>& comps, const Box& domain, int per_axis, std::uint64_t mask);

// (1, F¹, …, Fⁿ).
ExprVector extend(const OdeSpec& spec);

// Declared modulus for `mask` when present, otherwise the max over the
// components of F̃ of lattice estimates on the domain.
Modulus ode_modulus(const OdeSpec& spec, std::uint64_t mask, bool* declared = nullptr);

// Largest ratio estimated/declared over the declared moduli, sampled on the
// breakpoints of the estimate. Values above 2 mean a declaration is violated.
double declared_moduli_ratio(const OdeSpec& spec);

struct Theorem1Certificate {
  int index = 0;  // 0-based coordinate of ξ, 0 is t
  double component = 0.0;
  Modulus w1 = Modulus::lipschitz(0.0);
  Modulus w2 = Modulus::lipschitz(0.0);
  bool w1_declared = false;
  bool w2_declared = false;
  CriterionReport report;
  Verdict verdict = Verdict::Inconclusive;
  std::string to_csv(const std::vector<std::string>& names) const;
};

Theorem1Certificate theorem1_check(const OdeSpec& spec, const Vector& xi, const CriterionThresholds& th = {});

enum class FunnelVerdict { UniqueLike, FunnelDetected, Inconclusive };
std::string to_string(FunnelVerdict v);

struct FunnelConfig {
  double T = 1.0;
  std::vector<double> deltas{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  int ensemble = 16;
  std::uint64_t seed = 20240601;
  bool initial_probe = true;
  bool field_probe = true;
  FlowConfig flow;
};

struct FunnelReport {
  Vector basepoint;
  double T = 0.0;
  std::vector<double> deltas;      // descending
  std::vector<double> dispersion;  // max pairwise terminal distance in y
  std::vector<int> failures;       // trajectories lost to escape or domain errors
  double exponent = 0.0;           // log-log slope of dispersion against δ
  FunnelVerdict verdict = FunnelVerdict::Inconclusive;
  std::string to_csv() const;
};

// Terminal spread of ξ0 + δ·(random unit 𝒴 vectors) and of the fields F ± δ.
// Initial points falling outside the domain are reflected back across its
// boundary.
FunnelReport funnel(const OdeSpec& spec, const Vector& xi0, const FunnelConfig& cfg);

// paper-ex1 field: (−t log t^β − x log x^γ, 1 + y^α − x log x^δ) on [0,1]³ with
// w1 = Hoelder(α) and the transversal modulus LogLip(max(β, γ, δ)).
OdeSpec example1(double alpha, double beta, double gamma, double delta);

// y' = |y|^{2/3} on [0, 2]×[−1, 1], Hoelder(2/3) declared for both masks.
OdeSpec peano();

}  // namespace frob
