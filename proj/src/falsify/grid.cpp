#include <cmath>
#include <stdexcept>

#include "accsi/falsify/algorithms.hpp"

namespace accsi::falsify {

RareEventEstimate grid_search(const EvalFn& fn, const SearchSpace& space,
                              int points_per_dim, double tau,
                              std::size_t max_evals, const ExecOptions& opts) {
  if (points_per_dim < 2) {
    throw std::invalid_argument("grid_search: points_per_dim must be >= 2");
  }
  const std::size_t dim = space.dim();
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    total *= static_cast<std::size_t>(points_per_dim);
    if (total > max_evals) {
      throw std::invalid_argument("grid_search: lattice exceeds evaluation budget");
    }
  }

  std::vector<std::vector<double>> pts;
  pts.reserve(total);
  std::vector<int> idx(dim, 0);
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<double> x(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = space.lo[d] +
             space.width(d) * static_cast<double>(idx[d]) /
                 static_cast<double>(points_per_dim - 1);
    }
    pts.push_back(std::move(x));
    for (std::size_t d = 0; d < dim; ++d) {
      if (++idx[d] < points_per_dim) break;
      idx[d] = 0;
    }
  }

  const auto results = batch_eval(fn, pts, opts.parallel);

  RareEventEstimate est;
  est.algo = "gs";
  est.estimator = "indicator";
  est.tau = tau;
  est.n_evals = total;
  est.samples.reserve(total);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (results[i].objective <= tau) ++hits;
    est.samples.push_back(EvaluatedSample{pts[i], results[i].objective,
                                          results[i].collided, est.algo,
                                          static_cast<int>(i)});
  }
  est.p_hat = static_cast<double>(hits) / static_cast<double>(total);
  est.diagnostics = {{"points_per_dim", points_per_dim}, {"hits", hits}};
  return est;
}

}  // namespace accsi::falsify
