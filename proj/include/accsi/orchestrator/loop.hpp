#pragma once

#include <string>
#include <vector>

#include "accsi/orchestrator/config.hpp"

namespace accsi::orchestrator {

struct LoopResult {
  std::vector<std::string> policy_paths;  // gen0..genG
  std::string library_path;
};

// Full train -> verify -> store -> retrain cycle. Every stage is
// checkpointed under out_dir; rerunning with the same config resumes past
// completed stages.
LoopResult run_loop(const RunConfig& config, std::uint64_t seed);

}  // namespace accsi::orchestrator
