#pragma once

#include "accsi/falsify/algorithms.hpp"
#include "accsi/falsify/estimate.hpp"
#include "accsi/falsify/gp.hpp"
#include "accsi/rng.hpp"
#include "accsi/search_space.hpp"

namespace accsi::falsify {

struct BoOptions {
  int candidates = 4096;      // uniform EI candidates per iteration
  int refine_top = 8;         // local refinement seeds
  int refine_rounds = 16;
  int gp_window = 512;        // cap on GP training set size
  int refit_every = 10;       // hyperparameter refit cadence (iterations)
  int hyperfit_subset = 128;  // subsample size for hyperparameter fitting
  ExecOptions exec;
};

// Latin-hypercube init, then expected-improvement maximization over random
// candidates with local refinement. All evaluations are recorded; p_hat is
// the indicator mean over them and is exploration-biased (labeled so).
RareEventEstimate bayes_opt(const EvalFn& fn, const SearchSpace& space,
                            std::size_t n, std::size_t n_init, double tau,
                            Rng& rng, const BoOptions& opts = {});

}  // namespace accsi::falsify
