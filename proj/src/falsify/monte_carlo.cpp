#include <cmath>
#include <stdexcept>

#include "accsi/falsify/algorithms.hpp"

namespace accsi::falsify {

namespace {

#ifdef _OPENMP
constexpr bool kHaveOpenmp = true;
#else
constexpr bool kHaveOpenmp = false;
#endif

}  // namespace

std::vector<EvalResult> batch_eval_serial(const EvalFn& fn,
                                          const std::vector<std::vector<double>>& pts) {
  std::vector<EvalResult> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = fn(pts[i]);
  return out;
}

std::vector<EvalResult> batch_eval(const EvalFn& fn,
                                   const std::vector<std::vector<double>>& pts,
                                   bool parallel) {
  if (!parallel || !kHaveOpenmp) return batch_eval_serial(fn, pts);
  std::vector<EvalResult> out(pts.size());
  const auto n = static_cast<long long>(pts.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = fn(pts[static_cast<std::size_t>(i)]);
  }
  return out;
}

RareEventEstimate monte_carlo(const EvalFn& fn, const SearchSpace& space,
                              std::size_t n, double tau, Rng& rng,
                              const ExecOptions& opts) {
  if (n < 1) throw std::invalid_argument("monte_carlo: n must be >= 1");

  std::vector<std::vector<double>> pts(n);
  for (auto& p : pts) p = space.sample_uniform(rng);
  const auto results = batch_eval(fn, pts, opts.parallel);

  RareEventEstimate est;
  est.algo = "mc";
  est.estimator = "indicator";
  est.tau = tau;
  est.n_evals = n;
  est.samples.reserve(n);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i].objective <= tau) ++hits;
    est.samples.push_back(EvaluatedSample{pts[i], results[i].objective,
                                          results[i].collided, est.algo,
                                          static_cast<int>(i)});
  }
  est.p_hat = static_cast<double>(hits) / static_cast<double>(n);
  const double se =
      std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n));
  est.diagnostics = {{"std_error", se}, {"hits", hits}};
  return est;
}

}  // namespace accsi::falsify
