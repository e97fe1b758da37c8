#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <utility>

#include "accsi/rng.hpp"
#include "accsi/sim/env.hpp"

namespace accsi::policy {

constexpr int kObsDim = 5;
constexpr int kHidden = 64;
constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

// Two hidden ReLU layers, linear head. The actor applies tanh on top.
struct Mlp {
  Eigen::MatrixXd w1;  // kHidden x kObsDim
  Eigen::VectorXd b1;  // kHidden
  Eigen::MatrixXd w2;  // kHidden x kHidden
  Eigen::VectorXd b2;  // kHidden
  Eigen::MatrixXd w3;  // 1 x kHidden
  Eigen::VectorXd b3;  // 1
};

struct MlpGrads {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
};

struct PolicyParams {
  Mlp actor;
  Mlp critic;
  double log_std = -0.7;  // state-independent, kept within [kLogStdMin, kLogStdMax]

  // Orthogonal init, gain 1.0 on hidden layers and 0.01 on output layers.
  static PolicyParams random_init(Rng& rng);

  Eigen::VectorXd to_flat() const;
  void from_flat(const Eigen::VectorXd& flat);
  static int num_params();

  double std() const;
};

struct ActionSample {
  double action;    // clamped to [-1, 1], applied to the environment
  double raw;       // pre-clamp Gaussian sample; log_prob is evaluated here
  double log_prob;
  double mean;
  double std;
};

// Batch forward intermediates, reused by the backward pass.
struct MlpCache {
  Eigen::MatrixXd x;        // kObsDim x n
  Eigen::MatrixXd z1, h1;   // kHidden x n
  Eigen::MatrixXd z2, h2;   // kHidden x n
  Eigen::RowVectorXd z3;    // 1 x n, pre-activation head
};

Eigen::RowVectorXd mlp_forward_batch(const Mlp& net, const Eigen::MatrixXd& x,
                                     MlpCache* cache = nullptr);
// dz3 is dLoss/d(head pre-activation).
MlpGrads mlp_backward_batch(const Mlp& net, const MlpCache& cache,
                            const Eigen::RowVectorXd& dz3);

// mean = tanh(head), std = exp(log_std)
std::pair<double, double> actor_forward(const std::array<double, kObsDim>& obs,
                                        const PolicyParams& params);
double critic_forward(const std::array<double, kObsDim>& obs,
                      const PolicyParams& params);

double gaussian_log_prob(double x, double mean, double std);

ActionSample sample_action(const std::array<double, kObsDim>& obs,
                           const PolicyParams& params, Rng& rng);

// Deterministic evaluation policy: acts with the tanh mean.
sim::PolicyFn deterministic_policy(const PolicyParams& params);

// Flattens gradients in the exact order of PolicyParams::to_flat.
Eigen::VectorXd grads_to_flat(const MlpGrads& actor, const MlpGrads& critic,
                              double d_log_std);

// Versioned binary container: magic "ACSIPOL\1", u32 version, u32 layer
// count, per-layer (u32 rows, u32 cols, row-major f64 data), f64 log_std.
void save(const PolicyParams& params, const std::string& path);
PolicyParams load(const std::string& path);

}  // namespace accsi::policy
