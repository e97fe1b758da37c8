#include "accsi/sim/batch.hpp"

#include <cstddef>

namespace accsi::sim {

namespace {

BatchOutcome run_one(const PolicyFn& policy, const ScenarioParams& params,
                     const SimConfig& cfg) {
  const EpisodeResult r = run_episode(policy, params, cfg, /*keep_trajectory=*/false);
  return BatchOutcome{r.min_ttc, r.collided, r.total_reward};
}

}  // namespace

std::vector<BatchOutcome> evaluate_batch_serial(const PolicyFn& policy,
                                                const std::vector<ScenarioParams>& scenarios,
                                                const SimConfig& cfg) {
  std::vector<BatchOutcome> out(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    out[i] = run_one(policy, scenarios[i], cfg);
  }
  return out;
}

std::vector<BatchOutcome> evaluate_batch(const PolicyFn& policy,
                                         const std::vector<ScenarioParams>& scenarios,
                                         const SimConfig& cfg, bool parallel) {
  if (!parallel) return evaluate_batch_serial(policy, scenarios, cfg);
  std::vector<BatchOutcome> out(scenarios.size());
  const auto n = static_cast<long long>(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        run_one(policy, scenarios[static_cast<std::size_t>(i)], cfg);
  }
  return out;
}

}  // namespace accsi::sim
