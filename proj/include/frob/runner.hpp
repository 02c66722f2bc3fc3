#pragma once

#include "frob/config.hpp"

#include <string>
#include <vector>

namespace frob {

struct RunResult {
  int exit_code = 0;    // 0 done, 2 verdict differs from [experiment] expect
  std::string verdict;
  std::string report;   // full CSV including the '#' header block
  std::string path;     // written file, empty when no output dir was set
  ExperimentConfig resolved;
};

// Experiment kinds: moduli, mollify, frobenius, surface, ode-check,
// ode-funnel, pde-check, pde-solve-special, pde-frames, dyn-transport,
// dyn-dominate, dyn-traces.
const std::vector<std::string>& experiment_kinds();
const std::vector<std::string>& preset_names();

// Fills every default (including the preset's parameters) so the resolved
// config fully describes the run.
ExperimentConfig resolve(const ExperimentConfig& cfg);

// Throws frob::Error on invalid input or numeric failure; callers map that to
// exit code 1.
RunResult run(const ExperimentConfig& cfg);

}  // namespace frob
