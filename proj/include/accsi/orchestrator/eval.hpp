#pragma once

#include <string>
#include <vector>

#include "nlohmann/json.hpp"

#include "accsi/falsify/estimate.hpp"
#include "accsi/orchestrator/config.hpp"
#include "accsi/sim/env.hpp"

namespace accsi::orchestrator {

struct GenerationEval {
  int gen = 0;
  std::vector<long long> per_seed_collisions;
  double mean_collisions = 0.0;
  std::vector<double> ratios;  // vs Generation-0 mean
  double mean_ratio = 0.0, min_ratio = 0.0, max_ratio = 0.0;
};

struct EvalReport {
  std::string config_hash;
  int n_scenarios = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<GenerationEval> generations;
  nlohmann::json to_json() const;
};

// Uniform-scenario collision evaluation across generations; ratios are
// normalized so the Generation-0 seed-mean is 1.
EvalReport evaluate_uniform(const std::vector<sim::PolicyFn>& gen_policies,
                            const SearchSpace& space, const sim::SimConfig& cfg,
                            int n_scenarios, const std::vector<std::uint64_t>& seeds,
                            const std::string& config_hash, bool parallel = true);

// A scenario no controller can pass is not a valid safety test: requires
// the initial gap to exceed the worst-case relative stopping distance at
// full braking, with one control-period margin.
bool kinematically_survivable(const sim::ScenarioParams& p, const sim::SimConfig& cfg);

struct RiskySuite {
  std::vector<sim::ScenarioParams> scenarios;
  nlohmann::json meta;
};

// Pools verification samples below tau_risk (survivable ones only),
// uniformly subsamples `count`. Emits what exists on shortfall.
RiskySuite build_risky_suite(const std::vector<std::string>& verify_files,
                             double tau_risk, std::size_t count,
                             const sim::SimConfig& cfg, Rng& rng);

void write_suite(const std::string& path, const RiskySuite& suite);
RiskySuite load_suite(const std::string& path);

struct SuiteEval {
  std::vector<long long> per_seed_collisions;
  double mean_collisions = 0.0, std_collisions = 0.0;
  std::vector<double> min_ttcs;    // per scenario, first seed
  std::vector<double> mean_tgaps;  // per scenario, first seed
  nlohmann::json to_json() const;
};

// Stochastic policies are resampled per seed; deterministic policies give
// identical counts per seed.
SuiteEval evaluate_suite(
    const std::function<sim::PolicyFn(std::uint64_t seed)>& policy_for_seed,
    const std::vector<sim::ScenarioParams>& suite,
    const std::vector<std::uint64_t>& seeds, const sim::SimConfig& cfg,
    bool parallel = true);

// One trajectory CSV per scenario plus an index of the exact parameter
// vectors.
void export_trajectories(const sim::PolicyFn& policy,
                         const std::vector<sim::ScenarioParams>& scenarios,
                         const sim::SimConfig& cfg, const std::string& out_dir);

}  // namespace accsi::orchestrator
