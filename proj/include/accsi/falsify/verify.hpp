#pragma once

#include <string>

#include "accsi/falsify/algorithms.hpp"
#include "accsi/falsify/bo.hpp"
#include "accsi/policy/mlp.hpp"
#include "accsi/sim/env.hpp"

namespace accsi::falsify {

enum class Algorithm { GridSearch, MonteCarlo, CrossEntropy, BayesOpt, Ams };

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm algo);

// Wraps min-TTC of a deterministic episode rollout as the objective.
EvalFn episode_objective(const sim::PolicyFn& policy, const sim::SimConfig& cfg);

struct VerifyOptions {
  // CE iterations, AMS (population fraction of N, delta) etc. use these
  // defaults unless overridden.
  int ce_iterations = 8;
  double ams_population_frac = 0.25;
  double ams_delta = 0.1;
  int ams_max_levels = 100;
  std::size_t bo_init_frac_denom = 8;  // n_init = max(8, N / denom)
  bool parallel = true;
};

// Runs one falsification campaign of budget n against the given policy.
RareEventEstimate run_verification(Algorithm algo, const sim::PolicyFn& policy,
                                   const SearchSpace& space, std::size_t n,
                                   double tau, std::uint64_t seed,
                                   const sim::SimConfig& cfg,
                                   const VerifyOptions& opts = {});

}  // namespace accsi::falsify
