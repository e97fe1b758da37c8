#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

#include "accsi/search_space.hpp"
#include "accsi/sim/types.hpp"
#include "accsi/trainer/ppo.hpp"

namespace accsi::orchestrator {

struct RunConfig {
  std::string algo = "ams";
  int generations = 3;  // beyond Generation-0
  std::size_t n_verification = 8192;
  double tau = 2.0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6};
  int eval_scenarios = 500;
  SearchSpace space = default_scenario_space();
  sim::SimConfig sim;
  trainer::TrainConfig train;
  std::string out_dir = "out";
  bool parallel = true;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static RunConfig load_file(const std::string& path);

  // CI-sized profile: 50K steps/generation, N=512, 500 eval scenarios,
  // 5 seeds.
  void apply_desk_scale();

  void validate() const;
  std::string config_hash() const;
};

}  // namespace accsi::orchestrator
