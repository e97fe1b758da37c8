#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "accsi/policy/mlp.hpp"
#include "accsi/rng.hpp"
#include "accsi/sim/types.hpp"
#include "accsi/trainer/advantage.hpp"

namespace accsi::trainer {

struct TrainConfig {
  double gamma = 0.95;
  double lambda = 1.0;
  double lr = 3e-4;
  double clip_eps = 0.2;
  double beta_kl = 0.01;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  long long steps_per_generation = 300000;
  int rollout_steps = 2048;
  int epochs = 10;
  int minibatch = 256;
  double divergence_weight_limit = 1e3;
};

struct PpoBatch {
  Eigen::MatrixXd obs;  // kObsDim x n
  Eigen::VectorXd actions, old_log_probs, advantages, returns;
  Eigen::VectorXd old_means, old_stds;
  int size() const { return static_cast<int>(actions.size()); }
};

struct PpoDiagnostics {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double kl = 0.0;
  double clip_frac = 0.0;
  double entropy = 0.0;
};

// Clipped-surrogate PPO loss with value term, KL(old||new) penalty and
// optional entropy bonus. Pure function of (batch, params).
double ppo_loss(const PpoBatch& batch, const policy::PolicyParams& params,
                const TrainConfig& cfg, PpoDiagnostics* diag = nullptr);

// Exact reverse-mode gradient of ppo_loss w.r.t. the flat parameter vector.
Eigen::VectorXd ppo_backward(const PpoBatch& batch,
                             const policy::PolicyParams& params,
                             const TrainConfig& cfg, double* loss_out = nullptr,
                             PpoDiagnostics* diag = nullptr);

struct IterationMetrics {
  int iter = 0;
  long long steps = 0;  // cumulative environment steps
  double mean_return = 0.0;
  double collision_rate = 0.0;
  double kl = 0.0;
  double clip_frac = 0.0;
  double loss = 0.0;
};

using ScenarioSampler = std::function<sim::ScenarioParams(Rng&)>;

struct TrainResult {
  policy::PolicyParams params;
  std::vector<IterationMetrics> metrics;
};

// Collect -> advantage -> clipped update cycles until the step budget is
// spent. Episode resets draw scenarios from the sampler.
TrainResult train_generation(const policy::PolicyParams& init,
                             const ScenarioSampler& sampler,
                             const TrainConfig& cfg, const sim::SimConfig& sim_cfg,
                             Rng& rng);

}  // namespace accsi::trainer
