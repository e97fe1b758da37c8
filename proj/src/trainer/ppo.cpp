#include "accsi/trainer/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "accsi/policy/adam.hpp"
#include "accsi/sim/env.hpp"

namespace accsi::trainer {

namespace {

constexpr double kHalfLog2PiE = 1.4189385332046727417803297;  // 0.5*log(2*pi*e)

struct EvalState {
  policy::MlpCache actor_cache, critic_cache;
  Eigen::ArrayXd mean, z, logp, ratio, values, kl;
  Eigen::Array<bool, Eigen::Dynamic, 1> unclipped;
  double sigma = 1.0, log_sigma = 0.0;
  PpoDiagnostics diag;
};

double eval_loss(const PpoBatch& batch, const policy::PolicyParams& params,
                 const TrainConfig& cfg, EvalState& st, bool need_caches) {
  const int n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_loss: empty batch");

  st.log_sigma = params.log_std;
  st.sigma = std::exp(params.log_std);

  const Eigen::RowVectorXd az3 = policy::mlp_forward_batch(
      params.actor, batch.obs, need_caches ? &st.actor_cache : nullptr);
  const Eigen::RowVectorXd cz3 = policy::mlp_forward_batch(
      params.critic, batch.obs, need_caches ? &st.critic_cache : nullptr);

  st.mean = az3.transpose().array().tanh();
  st.values = cz3.transpose().array();
  st.z = (batch.actions.array() - st.mean) / st.sigma;
  st.logp = -0.5 * st.z.square() - st.log_sigma - 0.9189385332046727417803297;
  st.ratio = (st.logp - batch.old_log_probs.array()).exp();
  st.unclipped.resize(n);

  double surr_sum = 0.0, kl_sum = 0.0, vloss_sum = 0.0;
  int clipped_count = 0;
  st.kl.resize(n);
  for (int i = 0; i < n; ++i) {
    const double r = st.ratio[i];
    if (!std::isfinite(r)) {
      throw std::runtime_error("ppo_loss: non-finite ratio at sample " +
                               std::to_string(i));
    }
    const double a = batch.advantages[i];
    const double r_clip = std::clamp(r, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    const double ra = r * a;
    const double ca = r_clip * a;
    st.unclipped[i] = ra <= ca;
    surr_sum += std::min(ra, ca);
    if (std::fabs(r - 1.0) > cfg.clip_eps) ++clipped_count;

    const double so = batch.old_stds[i];
    const double dm = batch.old_means[i] - st.mean[i];
    st.kl[i] = std::log(st.sigma / so) +
               (so * so + dm * dm) / (2.0 * st.sigma * st.sigma) - 0.5;
    kl_sum += st.kl[i];

    const double dv = st.values[i] - batch.returns[i];
    vloss_sum += dv * dv;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const double entropy = st.log_sigma + kHalfLog2PiE;
  st.diag.policy_loss = -surr_sum * inv_n;
  st.diag.value_loss = cfg.value_coef * vloss_sum * inv_n;
  st.diag.kl = kl_sum * inv_n;
  st.diag.clip_frac = static_cast<double>(clipped_count) * inv_n;
  st.diag.entropy = entropy;
  st.diag.loss = st.diag.policy_loss + st.diag.value_loss +
                 cfg.beta_kl * st.diag.kl - cfg.entropy_coef * entropy;
  return st.diag.loss;
}

}  // namespace

double ppo_loss(const PpoBatch& batch, const policy::PolicyParams& params,
                const TrainConfig& cfg, PpoDiagnostics* diag) {
  EvalState st;
  const double loss = eval_loss(batch, params, cfg, st, /*need_caches=*/false);
  if (diag) *diag = st.diag;
  return loss;
}

Eigen::VectorXd ppo_backward(const PpoBatch& batch,
                             const policy::PolicyParams& params,
                             const TrainConfig& cfg, double* loss_out,
                             PpoDiagnostics* diag) {
  EvalState st;
  const double loss = eval_loss(batch, params, cfg, st, /*need_caches=*/true);
  if (loss_out) *loss_out = loss;
  if (diag) *diag = st.diag;

  const int n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double sig2 = st.sigma * st.sigma;

  Eigen::RowVectorXd actor_dz3(n), critic_dz3(n);
  double d_log_std = -cfg.entropy_coef;  // dH/dlog_std = 1
  for (int i = 0; i < n; ++i) {
    // surrogate: gradient flows only through the unclipped branch
    const double dsurr_dlogp =
        st.unclipped[i] ? st.ratio[i] * batch.advantages[i] : 0.0;
    const double dl_dlogp = -dsurr_dlogp * inv_n;
    // KL penalty
    const double dm = st.mean[i] - batch.old_means[i];
    const double dkl_dmean = dm / sig2;
    const double so = batch.old_stds[i];
    const double dkl_dlogstd = 1.0 - (so * so + dm * dm) / sig2;

    const double dl_dmean =
        dl_dlogp * (st.z[i] / st.sigma) + cfg.beta_kl * inv_n * dkl_dmean;
    actor_dz3[i] = dl_dmean * (1.0 - st.mean[i] * st.mean[i]);  // tanh'
    d_log_std += dl_dlogp * (st.z[i] * st.z[i] - 1.0) +
                 cfg.beta_kl * inv_n * dkl_dlogstd;

    critic_dz3[i] =
        cfg.value_coef * 2.0 * (st.values[i] - batch.returns[i]) * inv_n;
  }

  const policy::MlpGrads ag =
      policy::mlp_backward_batch(params.actor, st.actor_cache, actor_dz3);
  const policy::MlpGrads cg =
      policy::mlp_backward_batch(params.critic, st.critic_cache, critic_dz3);
  return policy::grads_to_flat(ag, cg, d_log_std);
}

namespace {

// Rollout collector keeping episode state across update iterations.
class Collector {
 public:
  Collector(const ScenarioSampler& sampler, const sim::SimConfig& sim_cfg,
            Rng& rng)
      : sampler_(sampler), sim_cfg_(sim_cfg), rng_(rng) {
    begin_episode();
  }

  struct Rollout {
    std::vector<Transition> transitions;
    double bootstrap_value = 0.0;
    std::vector<double> episode_returns;
    int episodes_done = 0;
    int collisions = 0;
  };

  Rollout collect(const policy::PolicyParams& params, int steps) {
    Rollout out;
    out.transitions.reserve(steps);
    for (int k = 0; k < steps; ++k) {
      const auto nobs = sim::normalize_obs(obs_);
      const auto as = policy::sample_action(nobs, params, rng_);
      const double value = policy::critic_forward(nobs, params);
      const auto sr = env_->step(as.action);
      episode_return_ += sr.reward;
      out.transitions.push_back(Transition{nobs, as.raw, as.log_prob, sr.reward,
                                           value, sr.done, as.mean, as.std});
      obs_ = sr.obs;
      if (sr.done) {
        out.episode_returns.push_back(episode_return_);
        ++out.episodes_done;
        if (sr.reason == sim::DoneReason::Collision) ++out.collisions;
        begin_episode();
      }
    }
    if (!out.transitions.back().done) {
      out.bootstrap_value =
          policy::critic_forward(sim::normalize_obs(obs_), params);
    }
    return out;
  }

 private:
  void begin_episode() {
    env_ = std::make_unique<sim::AccEnv>(sampler_(rng_), sim_cfg_);
    obs_ = env_->reset();
    episode_return_ = 0.0;
  }

  const ScenarioSampler& sampler_;
  sim::SimConfig sim_cfg_;
  Rng& rng_;
  std::unique_ptr<sim::AccEnv> env_;
  sim::Observation obs_;
  double episode_return_ = 0.0;
};

PpoBatch make_batch(const std::vector<Transition>& ts,
                    const std::vector<double>& adv,
                    const std::vector<double>& ret,
                    const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  PpoBatch b;
  b.obs.resize(policy::kObsDim, n);
  b.actions.resize(n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  b.old_means.resize(n);
  b.old_stds.resize(n);
  for (int i = 0; i < n; ++i) {
    const Transition& t = ts[idx[i]];
    for (int d = 0; d < policy::kObsDim; ++d) b.obs(d, i) = t.obs[d];
    b.actions[i] = t.action;
    b.old_log_probs[i] = t.log_prob;
    b.advantages[i] = adv[idx[i]];
    b.returns[i] = ret[idx[i]];
    b.old_means[i] = t.mean;
    b.old_stds[i] = t.std;
  }
  return b;
}

}  // namespace

TrainResult train_generation(const policy::PolicyParams& init,
                             const ScenarioSampler& sampler,
                             const TrainConfig& cfg, const sim::SimConfig& sim_cfg,
                             Rng& rng) {
  TrainResult result;
  result.params = init;
  if (cfg.steps_per_generation <= 0) return result;

  Eigen::VectorXd flat = result.params.to_flat();
  policy::Adam optimizer(static_cast<int>(flat.size()), cfg.lr);
  Collector collector(sampler, sim_cfg, rng);

  long long total_steps = 0;
  int iter = 0;
  while (total_steps < cfg.steps_per_generation) {
    const auto rollout = collector.collect(result.params, cfg.rollout_steps);
    total_steps += static_cast<long long>(rollout.transitions.size());

    auto [adv, ret] = compute_advantages(rollout.transitions, cfg.gamma,
                                         cfg.lambda, rollout.bootstrap_value);
    // per-batch advantage normalization
    {
      double m = 0.0;
      for (double a : adv) m += a;
      m /= static_cast<double>(adv.size());
      double s = 0.0;
      for (double a : adv) s += (a - m) * (a - m);
      s = std::sqrt(s / static_cast<double>(adv.size()));
      const double scale = 1.0 / std::max(s, 1e-8);
      for (double& a : adv) a = (a - m) * scale;
    }

    std::vector<int> order(rollout.transitions.size());
    std::iota(order.begin(), order.end(), 0);

    PpoDiagnostics agg;
    int updates = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      // Fisher-Yates shuffle driven by our RNG for reproducibility
      for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.uniform_int(i + 1)]);
      }
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(cfg.minibatch)) {
        const std::size_t end =
            std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
        std::vector<int> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
        const PpoBatch mb = make_batch(rollout.transitions, adv, ret, idx);
        PpoDiagnostics d;
        const Eigen::VectorXd grad =
            ppo_backward(mb, result.params, cfg, nullptr, &d);
        optimizer.step(flat, grad);
        // projection keeps the exploration scale bounded
        flat[flat.size() - 1] =
            std::clamp(flat[flat.size() - 1], policy::kLogStdMin, policy::kLogStdMax);
        result.params.from_flat(flat);
        agg.loss += d.loss;
        agg.kl += d.kl;
        agg.clip_frac += d.clip_frac;
        ++updates;
      }
    }
    agg.loss /= updates;
    agg.kl /= updates;
    agg.clip_frac /= updates;

    if (!std::isfinite(agg.loss) ||
        flat.cwiseAbs().mean() > cfg.divergence_weight_limit) {
      throw std::runtime_error("train_generation: divergence guard tripped at iter " +
                               std::to_string(iter));
    }

    IterationMetrics m;
    m.iter = iter++;
    m.steps = total_steps;
    if (!rollout.episode_returns.empty()) {
      double s = 0.0;
      for (double r : rollout.episode_returns) s += r;
      m.mean_return = s / static_cast<double>(rollout.episode_returns.size());
    }
    m.collision_rate =
        rollout.episodes_done > 0
            ? static_cast<double>(rollout.collisions) / rollout.episodes_done
            : 0.0;
    m.kl = agg.kl;
    m.clip_frac = agg.clip_frac;
    m.loss = agg.loss;
    result.metrics.push_back(m);
  }
  return result;
}

}  // namespace accsi::trainer
