#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

#include "accsi/search_space.hpp"

namespace accsi::falsify {

struct EvalResult {
  double objective = 0.0;
  bool collided = false;
};

// Black-box objective over the search space. Must be thread-safe: batched
// evaluations run under OpenMP.
using EvalFn = std::function<EvalResult(const std::vector<double>&)>;

struct EvaluatedSample {
  std::vector<double> params;
  double objective = 0.0;
  bool collided = false;
  std::string algo;
  int index = 0;  // evaluation order
};

struct RareEventEstimate {
  double p_hat = 0.0;
  double tau = 0.0;
  std::size_t n_evals = 0;
  std::vector<EvaluatedSample> samples;
  std::string algo;
  // "indicator", "importance_weighted", "level_product", "exploration_biased"
  std::string estimator;
  nlohmann::json diagnostics;
};

// Evaluates all points; the serial path is the reference the OpenMP path
// must match bit-for-bit.
std::vector<EvalResult> batch_eval_serial(const EvalFn& fn,
                                          const std::vector<std::vector<double>>& pts);
std::vector<EvalResult> batch_eval(const EvalFn& fn,
                                   const std::vector<std::vector<double>>& pts,
                                   bool parallel = true);

// One JSON object per sample:
//   {algo, gen, i, params:[...], objective, collided}
// followed by a trailing summary record with p_hat, tau, n and diagnostics.
void write_samples_jsonl(std::ostream& os, const RareEventEstimate& est, int gen);

}  // namespace accsi::falsify
