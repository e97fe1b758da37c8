#pragma once

#include <Eigen/Dense>
#include <utility>

#include "accsi/rng.hpp"

namespace accsi::falsify {

// Exact GP regression with a squared-exponential kernel. Inputs are expected
// in the unit cube; outputs are standardized internally.
struct GpSurrogate {
  Eigen::MatrixXd x;          // n x dim
  Eigen::VectorXd y;          // standardized targets
  Eigen::VectorXd length_scales;
  double signal_var = 1.0;
  double noise_var = 1e-4;
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd alpha;
  double y_mean = 0.0, y_scale = 1.0;
};

struct GpFitOptions {
  bool fit_hyperparams = true;
  int restarts = 3;   // multi-restart coordinate ascent on the log marginal
  int sweeps = 12;
  double jitter = 1e-8;
  // starting point (and fixed values when fit_hyperparams is false);
  // empty length scales mean the 0.3 default
  Eigen::VectorXd init_length_scales;
  double init_signal_var = 1.0;
  double init_noise_var = 1e-4;
};

GpSurrogate gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Rng& rng,
                   const GpFitOptions& opts = {});

// (mu, sigma^2) in the original output scale; sigma^2 >= 0.
std::pair<double, double> gp_predict(const GpSurrogate& gp,
                                     const Eigen::VectorXd& x);

// Expected improvement for minimization with incumbent f_best.
double expected_improvement(double mu, double var, double f_best);

}  // namespace accsi::falsify
