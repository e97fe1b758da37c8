#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "accsi/falsify/bo.hpp"

namespace accsi::falsify {

namespace {

// Latin hypercube: one sample per stratum per dimension, strata shuffled.
std::vector<std::vector<double>> latin_hypercube(const SearchSpace& space,
                                                 std::size_t n, Rng& rng) {
  const std::size_t dim = space.dim();
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (std::size_t d = 0; d < dim; ++d) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double u =
          (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
      pts[i][d] = space.lo[d] + u * space.width(d);
    }
  }
  return pts;
}

}  // namespace

RareEventEstimate bayes_opt(const EvalFn& fn, const SearchSpace& space,
                            std::size_t n, std::size_t n_init, double tau,
                            Rng& rng, const BoOptions& opts) {
  if (n_init < 2 || n_init >= n) {
    throw std::invalid_argument("bayes_opt: requires 2 <= n_init < n");
  }
  const std::size_t dim = space.dim();

  RareEventEstimate est;
  est.algo = "bo";
  est.estimator = "exploration_biased";
  est.tau = tau;

  std::vector<std::vector<double>> xs;   // original coordinates
  std::vector<double> ys;
  int eval_index = 0;
  auto evaluate = [&](const std::vector<double>& x) {
    const EvalResult r = fn(x);
    est.samples.push_back(
        EvaluatedSample{x, r.objective, r.collided, est.algo, eval_index++});
    xs.push_back(x);
    ys.push_back(r.objective);
  };

  for (const auto& x : latin_hypercube(space, n_init, rng)) evaluate(x);

  int fit_failures = 0;
  GpSurrogate gp;
  bool gp_ok = false;
  while (xs.size() < n) {
    const std::size_t iter = xs.size() - n_init;

    // training set: best + most recent when over the window cap
    std::vector<std::size_t> train_idx(xs.size());
    std::iota(train_idx.begin(), train_idx.end(), 0);
    if (xs.size() > static_cast<std::size_t>(opts.gp_window)) {
      std::sort(train_idx.begin(), train_idx.end(),
                [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
      const std::size_t half = static_cast<std::size_t>(opts.gp_window) / 2;
      std::vector<std::size_t> keep(train_idx.begin(),
                                    train_idx.begin() + static_cast<std::ptrdiff_t>(half));
      for (std::size_t i = xs.size() - half; i < xs.size(); ++i) keep.push_back(i);
      std::sort(keep.begin(), keep.end());
      keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
      train_idx = keep;
    }

    Eigen::MatrixXd xm(train_idx.size(), dim);
    Eigen::VectorXd yv(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      const auto u = space.normalize(xs[train_idx[i]]);
      for (std::size_t d = 0; d < dim; ++d) xm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = u[d];
      yv[static_cast<Eigen::Index>(i)] = ys[train_idx[i]];
    }

    try {
      GpFitOptions fit;
      fit.fit_hyperparams =
          (iter % static_cast<std::size_t>(opts.refit_every)) == 0 || !gp_ok;
      if (gp_ok) {
        fit.init_length_scales = gp.length_scales;
        fit.init_signal_var = gp.signal_var;
        fit.init_noise_var = gp.noise_var;
      }
      if (fit.fit_hyperparams && xm.rows() > opts.hyperfit_subset) {
        // fit hyperparameters on a subset, then factorize the full window
        std::vector<std::size_t> sub(train_idx.size());
        std::iota(sub.begin(), sub.end(), 0);
        for (std::size_t i = sub.size() - 1; i > 0; --i) {
          std::swap(sub[i], sub[rng.uniform_int(i + 1)]);
        }
        sub.resize(static_cast<std::size_t>(opts.hyperfit_subset));
        Eigen::MatrixXd xs_sub(sub.size(), dim);
        Eigen::VectorXd ys_sub(sub.size());
        for (std::size_t i = 0; i < sub.size(); ++i) {
          xs_sub.row(static_cast<Eigen::Index>(i)) = xm.row(static_cast<Eigen::Index>(sub[i]));
          ys_sub[static_cast<Eigen::Index>(i)] = yv[static_cast<Eigen::Index>(sub[i])];
        }
        const GpSurrogate sub_gp = gp_fit(xs_sub, ys_sub, rng, fit);
        fit.fit_hyperparams = false;
        fit.init_length_scales = sub_gp.length_scales;
        fit.init_signal_var = sub_gp.signal_var;
        fit.init_noise_var = sub_gp.noise_var;
      }
      gp = gp_fit(xm, yv, rng, fit);
      gp_ok = true;
    } catch (const std::exception& e) {
      ++fit_failures;
      gp_ok = false;
      std::cerr << "{\"warning\":\"bo surrogate fit failed, uniform fallback\","
                << "\"detail\":\"" << e.what() << "\"}\n";
      evaluate(space.sample_uniform(rng));
      continue;
    }

    const double f_best = *std::min_element(ys.begin(), ys.end());
    auto ei_at = [&](const std::vector<double>& u) {
      Eigen::VectorXd ux = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(dim));
      const auto [mu, var] = gp_predict(gp, ux);
      return expected_improvement(mu, var, f_best);
    };

    // uniform candidates in the unit cube
    std::vector<std::vector<double>> cands(static_cast<std::size_t>(opts.candidates),
                                           std::vector<double>(dim));
    for (auto& c : cands) {
      for (std::size_t d = 0; d < dim; ++d) c[d] = rng.uniform();
    }
    std::vector<double> ei(cands.size());
    const auto m = static_cast<long long>(cands.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < m; ++i) {
      ei[static_cast<std::size_t>(i)] = ei_at(cands[static_cast<std::size_t>(i)]);
    }

    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(),
                      order.begin() + std::min<std::size_t>(opts.refine_top, order.size()),
                      order.end(),
                      [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });

    std::vector<double> best_u = cands[order[0]];
    double best_ei = ei[order[0]];
    // local refinement: shrinking Gaussian perturbations around the leaders
    for (int t = 0; t < std::min<int>(opts.refine_top, static_cast<int>(order.size())); ++t) {
      std::vector<double> u = cands[order[static_cast<std::size_t>(t)]];
      double val = ei[order[static_cast<std::size_t>(t)]];
      double step = 0.05;
      for (int round = 0; round < opts.refine_rounds; ++round) {
        std::vector<double> cand(dim);
        for (std::size_t d = 0; d < dim; ++d) {
          cand[d] = std::clamp(u[d] + step * rng.normal(), 0.0, 1.0);
        }
        const double v = ei_at(cand);
        if (v > val) {
          val = v;
          u = cand;
        } else {
          step *= 0.8;
        }
      }
      if (val > best_ei) {
        best_ei = val;
        best_u = u;
      }
    }

    evaluate(space.denormalize(best_u));
  }

  est.n_evals = est.samples.size();
  std::size_t hits = 0;
  for (const auto& s : est.samples) {
    if (s.objective <= tau) ++hits;
  }
  est.p_hat = static_cast<double>(hits) / static_cast<double>(est.n_evals);
  est.diagnostics = {{"n_init", n_init},
                     {"fit_failures", fit_failures},
                     {"note", "p_hat is an exploration-biased indicator mean"}};
  return est;
}

}  // namespace accsi::falsify
