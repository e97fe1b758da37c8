#pragma once

#include <vector>

#include "accsi/sim/env.hpp"
#include "accsi/sim/types.hpp"

namespace accsi::sim {

struct BatchOutcome {
  double min_ttc = 0.0;
  bool collided = false;
  double total_reward = 0.0;
};

// Runs one episode per scenario. The policy must be thread-safe (pure).
// Serial reference implementation, kept as the oracle for the parallel path.
std::vector<BatchOutcome> evaluate_batch_serial(const PolicyFn& policy,
                                                const std::vector<ScenarioParams>& scenarios,
                                                const SimConfig& cfg);

// OpenMP-parallel version. Results are written by index, so the output is
// identical to the serial path for any schedule.
std::vector<BatchOutcome> evaluate_batch(const PolicyFn& policy,
                                         const std::vector<ScenarioParams>& scenarios,
                                         const SimConfig& cfg,
                                         bool parallel = true);

}  // namespace accsi::sim
