#pragma once

#include <array>
#include <utility>
#include <vector>

namespace accsi::trainer {

struct Transition {
  std::array<double, 5> obs;
  double action;    // pre-clamp Gaussian sample
  double log_prob;  // collection-time log pi(action | obs)
  double reward;
  double value;
  bool done;
  double mean;  // collection-time distribution, for the KL penalty
  double std;
};

// Generalized-advantage recursion. At lambda = 1 this is the n-step
// discounted-return advantage. Terminal transitions bootstrap with 0;
// a truncated batch tail bootstraps with `bootstrap_value`.
// Returns (advantages, returns).
std::pair<std::vector<double>, std::vector<double>> compute_advantages(
    const std::vector<Transition>& transitions, double gamma, double lambda,
    double bootstrap_value = 0.0);

}  // namespace accsi::trainer
