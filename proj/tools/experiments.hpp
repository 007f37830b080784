#pragma once

#include <stdexcept>

#include "config.hpp"
#include "report.hpp"

namespace gibbslab::tools {

// Raised when a computation breaks down (non-convergence, empty ensembles).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Report run_experiment(const ExperimentConfig& cfg);

}  // namespace gibbslab::tools
