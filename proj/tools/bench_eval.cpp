// Compares the serial reference batch evaluator against the OpenMP one on
// identical workloads and checks bit-identical outcomes.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "accsi/rng.hpp"
#include "accsi/search_space.hpp"
#include "accsi/sim/batch.hpp"
#include "accsi/sim/env.hpp"

using namespace accsi;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 4096;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;

  const SearchSpace space = default_scenario_space();
  sim::SimConfig cfg;
  Rng rng(12345);
  std::vector<sim::ScenarioParams> scen;
  scen.reserve(n);
  for (int i = 0; i < n; ++i)
    scen.push_back(sim::ScenarioParams::from_vector(space.sample_uniform(rng)));

  auto policy = sim::idm_policy(cfg);

  using clock = std::chrono::steady_clock;
  auto time_ms = [](auto fn) {
    auto t0 = clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  std::vector<sim::BatchOutcome> serial, parallel;
  double t_serial = 0.0, t_parallel = 0.0;
  for (int r = 0; r < reps; ++r) {
    t_serial += time_ms([&] { serial = sim::evaluate_batch_serial(policy, scen, cfg); });
    t_parallel += time_ms([&] { parallel = sim::evaluate_batch(policy, scen, cfg); });
  }
  t_serial /= reps;
  t_parallel /= reps;

  bool identical = serial.size() == parallel.size();
  for (std::size_t i = 0; identical && i < serial.size(); ++i) {
    identical = serial[i].min_ttc == parallel[i].min_ttc &&
                serial[i].collided == parallel[i].collided &&
                serial[i].total_reward == parallel[i].total_reward;
  }

  std::printf("episodes      : %d (avg of %d reps)\n", n, reps);
  std::printf("serial        : %.1f ms\n", t_serial);
  std::printf("openmp        : %.1f ms\n", t_parallel);
  std::printf("speedup       : %.2fx\n", t_serial / t_parallel);
  std::printf("bit-identical : %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
