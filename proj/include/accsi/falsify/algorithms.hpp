#pragma once

#include <cstddef>

#include "accsi/falsify/estimate.hpp"
#include "accsi/rng.hpp"
#include "accsi/search_space.hpp"

namespace accsi::falsify {

struct ExecOptions {
  bool parallel = true;  // batched objective evaluations under OpenMP
};

// Full-lattice evaluation, points_per_dim^dim points including endpoints.
// Refuses to start if the lattice exceeds max_evals.
RareEventEstimate grid_search(const EvalFn& fn, const SearchSpace& space,
                              int points_per_dim, double tau,
                              std::size_t max_evals,
                              const ExecOptions& opts = {});

// N i.i.d. uniform draws; indicator-mean estimate with standard error.
RareEventEstimate monte_carlo(const EvalFn& fn, const SearchSpace& space,
                              std::size_t n, double tau, Rng& rng,
                              const ExecOptions& opts = {});

struct CeOptions {
  double elite_frac = 0.1;
  double smoothing = 0.7;      // blend factor on mean/std updates
  double min_std_frac = 0.01;  // std floor as a fraction of dimension width
  ExecOptions exec;
};

// Truncated diagonal-Gaussian adaptive importance sampling. Refits the
// proposal to the elite fraction each iteration; the final iteration's
// batch yields the importance-weighted probability estimate.
RareEventEstimate cross_entropy_search(const EvalFn& fn, const SearchSpace& space,
                                       std::size_t n_total, int iter_count,
                                       double tau, Rng& rng,
                                       const CeOptions& opts = {});

struct AmsOptions {
  int max_levels = 100;
  double mutation_std_frac = 0.1;  // per-dimension, fraction of range
  std::size_t max_evals = 0;       // 0 = unlimited
  ExecOptions exec;
};

// Adaptive multilevel splitting: discards the worst ceil(delta*N) walkers
// per level, resurrects them from survivors via a reflected Gaussian
// mutation accepted only inside the level set. p_hat is the product of the
// level survival fractions times the final indicator mean.
RareEventEstimate ams(const EvalFn& fn, const SearchSpace& space,
                      std::size_t n_population, double delta, double tau,
                      Rng& rng, const AmsOptions& opts = {});

// Truncated-normal helpers shared by CE (inverse-CDF sampling on [lo, hi]).
double trunc_normal_sample(double mu, double sigma, double lo, double hi, Rng& rng);
double trunc_normal_pdf(double x, double mu, double sigma, double lo, double hi);

}  // namespace accsi::falsify
