#include "accsi/falsify/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "accsi/mathutil.hpp"

namespace accsi::falsify {

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& ls, double sf2) {
  const auto n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = sf2;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index d = 0; d < x.cols(); ++d) {
        const double dx = (x(i, d) - x(j, d)) / ls[d];
        s += dx * dx;
      }
      k(i, j) = k(j, i) = sf2 * std::exp(-0.5 * s);
    }
  }
  return k;
}

// Returns log marginal likelihood, or -inf if the factorization fails.
double log_marginal(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& ls, double sf2, double sn2,
                    double jitter) {
  const auto n = x.rows();
  Eigen::MatrixXd k = kernel_matrix(x, ls, sf2);
  k.diagonal().array() += sn2 + jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd alpha = llt.solve(y);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(llt.matrixLLT()(i, i));
  return -0.5 * y.dot(alpha) - logdet -
         0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

void factorize(GpSurrogate& gp, double jitter) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd k = kernel_matrix(gp.x, gp.length_scales, gp.signal_var);
    k.diagonal().array() += gp.noise_var + jitter;
    gp.chol.compute(k);
    if (gp.chol.info() == Eigen::Success) {
      gp.alpha = gp.chol.solve(gp.y);
      return;
    }
    jitter *= 10.0;
  }
  throw std::runtime_error("gp_fit: covariance not positive definite after jitter escalation");
}

}  // namespace

GpSurrogate gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Rng& rng,
                   const GpFitOptions& opts) {
  if (x.rows() < 2 || x.rows() != y.size()) {
    throw std::invalid_argument("gp_fit: need >= 2 samples with matching targets");
  }
  GpSurrogate gp;
  gp.x = x;
  gp.y_mean = y.mean();
  const double var = (y.array() - gp.y_mean).square().mean();
  gp.y_scale = std::sqrt(std::max(var, 1e-12));
  gp.y = (y.array() - gp.y_mean) / gp.y_scale;

  const auto dim = x.cols();
  gp.length_scales = (opts.init_length_scales.size() == dim)
                         ? opts.init_length_scales
                         : Eigen::VectorXd::Constant(dim, 0.3);
  gp.signal_var = opts.init_signal_var;
  gp.noise_var = opts.init_noise_var;

  if (opts.fit_hyperparams) {
    // coordinate ascent in log space over (length scales, signal, noise)
    double best_lml = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_ls = gp.length_scales;
    double best_sf2 = gp.signal_var, best_sn2 = gp.noise_var;
    static const double steps[] = {0.5, 0.8, 1.25, 2.0};

    for (int restart = 0; restart < opts.restarts; ++restart) {
      Eigen::VectorXd ls(dim);
      for (Eigen::Index d = 0; d < dim; ++d) {
        ls[d] = (restart == 0) ? gp.length_scales[d]
                               : std::exp(rng.uniform(std::log(0.05), std::log(2.0)));
      }
      double sf2 = (restart == 0) ? gp.signal_var : 1.0;
      double sn2 = (restart == 0) ? gp.noise_var
                                  : std::exp(rng.uniform(std::log(1e-8), std::log(1e-2)));
      double lml = log_marginal(x, gp.y, ls, sf2, sn2, opts.jitter);

      for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
        bool improved = false;
        auto try_param = [&](double& p, double lo, double hi) {
          for (double s : steps) {
            const double cand = std::clamp(p * s, lo, hi);
            if (cand == p) continue;
            const double old = p;
            p = cand;
            const double l = log_marginal(x, gp.y, ls, sf2, sn2, opts.jitter);
            if (l > lml + 1e-10) {
              lml = l;
              improved = true;
            } else {
              p = old;
            }
          }
        };
        for (Eigen::Index d = 0; d < dim; ++d) try_param(ls[d], 1e-3, 1e2);
        try_param(sf2, 1e-6, 1e4);
        try_param(sn2, 1e-10, 1.0);
        if (!improved) break;
      }
      if (lml > best_lml) {
        best_lml = lml;
        best_ls = ls;
        best_sf2 = sf2;
        best_sn2 = sn2;
      }
    }
    gp.length_scales = best_ls;
    gp.signal_var = best_sf2;
    gp.noise_var = best_sn2;
  }

  factorize(gp, opts.jitter);
  return gp;
}

std::pair<double, double> gp_predict(const GpSurrogate& gp,
                                     const Eigen::VectorXd& x) {
  const auto n = gp.x.rows();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < gp.x.cols(); ++d) {
      const double dx = (gp.x(i, d) - x[d]) / gp.length_scales[d];
      s += dx * dx;
    }
    k[i] = gp.signal_var * std::exp(-0.5 * s);
  }
  const double mu_std = k.dot(gp.alpha);
  const Eigen::VectorXd v = gp.chol.solve(k);
  const double var_std = std::max(0.0, gp.signal_var - k.dot(v));
  return {gp.y_mean + gp.y_scale * mu_std, gp.y_scale * gp.y_scale * var_std};
}

double expected_improvement(double mu, double var, double f_best) {
  if (var <= 0.0) return std::max(0.0, f_best - mu);
  const double sd = std::sqrt(var);
  const double z = (f_best - mu) / sd;
  return (f_best - mu) * norm_cdf(z) + sd * norm_pdf(z);
}

}  // namespace accsi::falsify
