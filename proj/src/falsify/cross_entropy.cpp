#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "accsi/falsify/algorithms.hpp"
#include "accsi/mathutil.hpp"

namespace accsi::falsify {

double trunc_normal_sample(double mu, double sigma, double lo, double hi, Rng& rng) {
  const double a = norm_cdf((lo - mu) / sigma);
  const double b = norm_cdf((hi - mu) / sigma);
  double u = a + (b - a) * rng.uniform();
  u = std::clamp(u, 1e-15, 1.0 - 1e-15);
  const double x = mu + sigma * norm_quantile(u);
  return std::clamp(x, lo, hi);
}

double trunc_normal_pdf(double x, double mu, double sigma, double lo, double hi) {
  if (x < lo || x > hi) return 0.0;
  const double a = norm_cdf((lo - mu) / sigma);
  const double b = norm_cdf((hi - mu) / sigma);
  return norm_pdf((x - mu) / sigma) / (sigma * (b - a));
}

RareEventEstimate cross_entropy_search(const EvalFn& fn, const SearchSpace& space,
                                       std::size_t n_total, int iter_count,
                                       double tau, Rng& rng,
                                       const CeOptions& opts) {
  if (!(opts.elite_frac > 0.0 && opts.elite_frac < 1.0)) {
    throw std::invalid_argument("cross_entropy_search: elite_frac must be in (0,1)");
  }
  if (iter_count < 1) {
    throw std::invalid_argument("cross_entropy_search: iter_count must be >= 1");
  }
  const std::size_t batch = n_total / static_cast<std::size_t>(iter_count);
  if (batch < 2) {
    throw std::invalid_argument("cross_entropy_search: budget too small for iterations");
  }

  const std::size_t dim = space.dim();
  // proposal starts centered with wide spread
  std::vector<double> mu(dim), sd(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    mu[d] = 0.5 * (space.lo[d] + space.hi[d]);
    sd[d] = 0.5 * space.width(d);
  }

  double volume = 1.0;
  for (std::size_t d = 0; d < dim; ++d) volume *= space.width(d);
  const double p0_density = 1.0 / volume;

  RareEventEstimate est;
  est.algo = "ce";
  est.estimator = "importance_weighted";
  est.tau = tau;
  est.diagnostics["trace"] = nlohmann::json::array();

  int eval_index = 0;
  double final_p_hat = 0.0;
  for (int it = 0; it < iter_count; ++it) {
    std::vector<std::vector<double>> pts(batch);
    for (auto& p : pts) {
      p.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        p[d] = trunc_normal_sample(mu[d], sd[d], space.lo[d], space.hi[d], rng);
      }
    }
    const auto results = batch_eval(fn, pts, opts.exec.parallel);
    for (std::size_t i = 0; i < batch; ++i) {
      est.samples.push_back(EvaluatedSample{pts[i], results[i].objective,
                                            results[i].collided, est.algo,
                                            eval_index++});
    }

    // importance-weighted indicator under the current proposal
    double wsum = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      if (results[i].objective > tau) continue;
      double q = 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        q *= trunc_normal_pdf(pts[i][d], mu[d], sd[d], space.lo[d], space.hi[d]);
      }
      if (q <= 0.0 || !std::isfinite(q)) {
        throw std::runtime_error("cross_entropy_search: degenerate proposal density");
      }
      wsum += p0_density / q;
    }
    final_p_hat = wsum / static_cast<double>(batch);

    // refit to the elite (lowest-objective) fraction
    std::vector<std::size_t> order(batch);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return results[a].objective < results[b].objective;
    });
    const std::size_t n_elite = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(opts.elite_frac * batch)));

    std::vector<double> new_mu(dim, 0.0), new_sd(dim, 0.0);
    for (std::size_t e = 0; e < n_elite; ++e) {
      for (std::size_t d = 0; d < dim; ++d) new_mu[d] += pts[order[e]][d];
    }
    for (std::size_t d = 0; d < dim; ++d) new_mu[d] /= static_cast<double>(n_elite);
    for (std::size_t e = 0; e < n_elite; ++e) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double dx = pts[order[e]][d] - new_mu[d];
        new_sd[d] += dx * dx;
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      new_sd[d] = std::sqrt(new_sd[d] / static_cast<double>(n_elite));
      const double floor = opts.min_std_frac * space.width(d);
      new_sd[d] = std::max(new_sd[d], floor);
      mu[d] = opts.smoothing * new_mu[d] + (1.0 - opts.smoothing) * mu[d];
      sd[d] = opts.smoothing * new_sd[d] + (1.0 - opts.smoothing) * sd[d];
      mu[d] = std::clamp(mu[d], space.lo[d], space.hi[d]);
    }

    est.diagnostics["trace"].push_back(
        {{"iter", it}, {"mean", mu}, {"std", sd}, {"p_hat", final_p_hat}});
  }

  est.n_evals = est.samples.size();
  est.p_hat = final_p_hat;
  return est;
}

}  // namespace accsi::falsify
