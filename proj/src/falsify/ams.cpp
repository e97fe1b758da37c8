#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "accsi/falsify/algorithms.hpp"

namespace accsi::falsify {

namespace {

double reflect_into(double x, double lo, double hi) {
  const double w = hi - lo;
  double y = std::fmod(x - lo, 2.0 * w);
  if (y < 0.0) y += 2.0 * w;
  return lo + (y <= w ? y : 2.0 * w - y);
}

}  // namespace

RareEventEstimate ams(const EvalFn& fn, const SearchSpace& space,
                      std::size_t n_population, double delta, double tau,
                      Rng& rng, const AmsOptions& opts) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ams: delta must be in (0,1)");
  }
  if (n_population < 10) {
    throw std::invalid_argument("ams: population must be >= 10");
  }
  const std::size_t dim = space.dim();
  const std::size_t n = n_population;
  const auto k_discard = static_cast<std::size_t>(
      std::ceil(delta * static_cast<double>(n)));

  RareEventEstimate est;
  est.algo = "ams";
  est.estimator = "level_product";
  est.tau = tau;
  est.diagnostics["levels"] = nlohmann::json::array();

  std::vector<std::vector<double>> walkers(n);
  for (auto& w : walkers) w = space.sample_uniform(rng);
  auto results = batch_eval(fn, walkers, opts.exec.parallel);

  int eval_index = 0;
  auto record = [&](const std::vector<double>& x, const EvalResult& r) {
    est.samples.push_back(
        EvaluatedSample{x, r.objective, r.collided, est.algo, eval_index++});
  };
  for (std::size_t i = 0; i < n; ++i) record(walkers[i], results[i]);

  double log_product = 0.0;
  int levels = 0;
  std::vector<double> mut_std(dim);

  while (levels < opts.max_levels) {
    if (opts.max_evals > 0 &&
        est.samples.size() + k_discard > opts.max_evals) {
      break;  // budget exhausted; estimate from the current population
    }
    // level threshold at the k-th highest objective
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = results[i].objective;
    std::vector<double> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    const double level = sorted[n - k_discard];
    if (level <= tau) break;  // reached the target set

    std::vector<std::size_t> survivors, discarded;
    for (std::size_t i = 0; i < n; ++i) {
      (f[i] < level ? survivors : discarded).push_back(i);
    }
    if (survivors.empty()) {
      throw std::runtime_error(
          "ams: no survivors below level " + std::to_string(level) +
          " (population degenerate, all walkers at the same objective)");
    }
    const double frac =
        static_cast<double>(survivors.size()) / static_cast<double>(n);
    log_product += std::log(frac);
    ++levels;
    est.diagnostics["levels"].push_back(
        {{"level", level}, {"survival_fraction", frac}});

    // Mutation scale: a fixed fraction of the range stops mixing once the
    // level set shrinks below it (every proposal is rejected and the
    // population collapses), so cap it by the survivor spread per dimension.
    for (std::size_t d = 0; d < dim; ++d) {
      double mean = 0.0;
      for (std::size_t i : survivors) mean += walkers[i][d];
      mean /= static_cast<double>(survivors.size());
      double var = 0.0;
      for (std::size_t i : survivors) {
        const double dx = walkers[i][d] - mean;
        var += dx * dx;
      }
      var /= static_cast<double>(survivors.size());
      const double spread = std::sqrt(var);
      mut_std[d] = std::min(opts.mutation_std_frac * space.width(d),
                            std::max(spread, 1e-12 * space.width(d)));
    }

    // resurrect discarded walkers: clone a survivor, one reflected-Gaussian
    // mutation step, accepted only if it stays inside the level set
    std::vector<std::vector<double>> proposals(discarded.size());
    std::vector<std::size_t> parents(discarded.size());
    for (std::size_t j = 0; j < discarded.size(); ++j) {
      parents[j] = survivors[rng.uniform_int(survivors.size())];
      std::vector<double> x = walkers[parents[j]];
      for (std::size_t d = 0; d < dim; ++d) {
        x[d] = reflect_into(x[d] + mut_std[d] * rng.normal(), space.lo[d],
                            space.hi[d]);
      }
      proposals[j] = std::move(x);
    }
    const auto prop_results = batch_eval(fn, proposals, opts.exec.parallel);
    for (std::size_t j = 0; j < discarded.size(); ++j) {
      record(proposals[j], prop_results[j]);
      const std::size_t slot = discarded[j];
      if (prop_results[j].objective < level) {
        walkers[slot] = proposals[j];
        results[slot] = prop_results[j];
      } else {
        walkers[slot] = walkers[parents[j]];
        results[slot] = results[parents[j]];
      }
    }
  }

  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i].objective <= tau) ++hits;
  }
  const double indicator = static_cast<double>(hits) / static_cast<double>(n);
  est.p_hat = std::exp(log_product) * indicator;
  est.n_evals = est.samples.size();
  est.diagnostics["n_levels"] = levels;
  est.diagnostics["final_indicator"] = indicator;
  return est;
}

}  // namespace accsi::falsify
