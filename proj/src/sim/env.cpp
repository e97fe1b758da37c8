#include "accsi/sim/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "accsi/sim/idm.hpp"

namespace accsi::sim {

namespace {

constexpr double kObsLo[5] = {10.0, -4.0, -8.0, 10.0, -40.0};
constexpr double kObsHi[5] = {40.0, 4.0, 8.0, 120.0, 40.0};
constexpr double kMinTgap = 1e-6;  // floor keeps the -1/tgap branch finite

double clamp01(double x, double lo, double hi) { return std::clamp(x, lo, hi); }

}  // namespace

ScenarioParams ScenarioParams::from_vector(const std::vector<double>& v) {
  if (v.size() != 4) {
    throw std::invalid_argument("ScenarioParams: expected 4 values");
  }
  return {v[0], v[1], v[2], v[3]};
}

double time_gap(double d, double v_ego, const SimConfig& cfg) {
  if (v_ego <= 0.0) return cfg.ttc_cap;
  return d / v_ego;
}

double ttc(double d, double v_ego, double v_mio, const SimConfig& cfg) {
  if (v_ego > v_mio) return d / (v_ego - v_mio);
  return cfg.ttc_cap;
}

double reward(double tgap, double jerk, double v_ego, bool collided,
              const SimConfig& cfg) {
  if (collided) return cfg.reward.collision_penalty;
  const double tg = std::max(tgap, kMinTgap);
  double r_gap;
  if (tg < 0.8) {
    r_gap = -1.0 / tg;
  } else if (tg <= 2.0) {
    r_gap = tg;
  } else {
    r_gap = -tg;
  }
  return r_gap + cfg.reward.c_jerk * jerk +
         cfg.reward.c_speed * v_ego / cfg.reward.v_max;
}

std::array<double, 5> normalize_obs(const Observation& raw) {
  const double fields[5] = {raw.v_ego, raw.a_ego, raw.jerk, raw.d_mio, raw.dv_mio};
  std::array<double, 5> out{};
  for (int i = 0; i < 5; ++i) {
    const double c = clamp01(fields[i], kObsLo[i], kObsHi[i]);
    out[i] = 2.0 * (c - kObsLo[i]) / (kObsHi[i] - kObsLo[i]) - 1.0;
  }
  return out;
}

void validate_params(const ScenarioParams& p, const SearchSpace& space) {
  if (space.dim() != 4) {
    throw std::invalid_argument("validate_params: scenario space must be 4-D");
  }
  const char* names[4] = {"v_ego0", "d_mio0", "v_mio0", "v_mioT"};
  const auto vals = p.to_array();
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(vals[i])) {
      throw ScenarioValidationError(std::string(names[i]) + " is not finite");
    }
    if (vals[i] < space.lo[i] || vals[i] > space.hi[i]) {
      throw ScenarioValidationError(std::string(names[i]) + " out of range");
    }
  }
}

AccEnv::AccEnv(const ScenarioParams& params, const SimConfig& cfg,
               const SearchSpace& space)
    : params_(params), cfg_(cfg) {
  validate_params(params_, space);
  reset();
}

Observation AccEnv::reset() {
  ego_ = VehicleState{0.0, params_.v_ego0, 0.0, 0.0};
  mio_ = VehicleState{params_.d_mio0, params_.v_mio0, 0.0, 0.0};
  step_count_ = 0;
  done_ = false;
  jerk_ = 0.0;
  return observe();
}

Observation AccEnv::observe() const {
  return Observation{ego_.v, ego_.a, jerk_, gap(), mio_.v - ego_.v};
}

StepResult AccEnv::step(double action) {
  if (done_) throw std::logic_error("AccEnv::step: episode already done");
  if (!std::isfinite(action)) {
    throw std::invalid_argument("AccEnv::step: non-finite action");
  }

  const double a_ego = std::clamp(action, -1.0, 1.0) * cfg_.idm.alpha_max;
  const double a_mio = idm_free_road_acceleration(mio_.v, params_.v_mioT, cfg_);

  ego_.a_prev = ego_.a;
  mio_.a_prev = mio_.a;
  ego_.a = a_ego;
  mio_.a = a_mio;

  // explicit Euler, velocities floored at zero
  ego_.x += ego_.v * cfg_.dt;
  mio_.x += mio_.v * cfg_.dt;
  ego_.v = std::max(0.0, ego_.v + ego_.a * cfg_.dt);
  mio_.v = std::max(0.0, mio_.v + mio_.a * cfg_.dt);
  ++step_count_;

  jerk_ = std::clamp((ego_.a - ego_.a_prev) / cfg_.dt, -8.0, 8.0);

  StepResult out;
  const double d = gap();
  if (d <= 0.0) {
    done_ = true;
    out.reason = DoneReason::Collision;
    out.reward = reward(0.0, jerk_, ego_.v, true, cfg_);
  } else {
    const double tg = time_gap(d, ego_.v, cfg_);
    out.reward = reward(tg, jerk_, ego_.v, false, cfg_);
    if (step_count_ >= cfg_.horizon) {
      done_ = true;
      out.reason = DoneReason::HorizonReached;
    }
  }
  out.done = done_;
  out.obs = observe();
  return out;
}

EpisodeResult run_episode(const PolicyFn& policy, const ScenarioParams& params,
                          const SimConfig& cfg, bool keep_trajectory) {
  AccEnv env(params, cfg);
  Observation obs = env.reset();

  EpisodeResult res;
  double min_ttc = cfg.ttc_cap;
  auto record = [&](double rew) {
    const double d = env.gap();
    const double tau = ttc(std::max(d, 0.0), env.ego().v, env.mio().v, cfg);
    const double tg = time_gap(std::max(d, 0.0), env.ego().v, cfg);
    min_ttc = std::min(min_ttc, tau);
    if (keep_trajectory) {
      res.trajectory.push_back(TrajectoryPoint{
          env.step_count() * cfg.dt, env.ego().x, env.ego().v, env.ego().a,
          env.mio().x, env.mio().v, d, tau, tg, rew});
    }
  };

  record(0.0);  // initial state
  while (!env.done()) {
    const double action = policy(obs);
    const StepResult sr = env.step(action);
    obs = sr.obs;
    res.total_reward += sr.reward;
    record(sr.reward);
    if (sr.reason == DoneReason::Collision) res.collided = true;
  }
  res.steps = env.step_count();
  res.min_ttc = min_ttc;
  return res;
}

PolicyFn idm_policy(const SimConfig& cfg, double v_desired) {
  return [cfg, v_desired](const Observation& obs) {
    const double d = std::max(obs.d_mio, 0.1);
    const double dv = -obs.dv_mio;  // IDM closing speed is v - v_lead
    const double a = idm_acceleration(obs.v_ego, v_desired, d, dv, cfg);
    return std::clamp(a / cfg.idm.alpha_max, -1.0, 1.0);
  };
}

void write_trajectory_csv(std::ostream& os, const EpisodeResult& result) {
  os << "t,x_ego,v_ego,a_ego,x_mio,v_mio,d_mio,ttc,tgap,reward\n";
  char buf[256];
  for (const auto& p : result.trajectory) {
    std::snprintf(buf, sizeof(buf),
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  p.t, p.x_ego, p.v_ego, p.a_ego, p.x_mio, p.v_mio, p.d_mio,
                  p.ttc, p.tgap, p.reward);
    os << buf;
  }
}

}  // namespace accsi::sim
