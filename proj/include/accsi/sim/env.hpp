#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>

#include "accsi/search_space.hpp"
#include "accsi/sim/types.hpp"

namespace accsi::sim {

// Time gap d / v_ego; stationary EGO maps to the TTC cap so the reward's
// -tgap branch penalizes loitering.
double time_gap(double d, double v_ego, const SimConfig& cfg);

// Time to collision d / (v_ego - v_mio), defined only while closing;
// otherwise the cap.
double ttc(double d, double v_ego, double v_mio, const SimConfig& cfg);

double reward(double tgap, double jerk, double v_ego, bool collided,
              const SimConfig& cfg);

// Clamp to the observation-table ranges, then map affinely into [-1, 1].
std::array<double, 5> normalize_obs(const Observation& raw);

// Raised by reset() when a scenario parameter is outside its range.
struct ScenarioValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void validate_params(const ScenarioParams& p, const SearchSpace& space);

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  DoneReason reason = DoneReason::NotDone;
};

// Deterministic longitudinal two-vehicle environment. EGO follows an
// external action in [-1,1]; MIO runs free-road IDM toward its target speed.
class AccEnv {
 public:
  AccEnv(const ScenarioParams& params, const SimConfig& cfg,
         const SearchSpace& space = default_scenario_space());

  Observation reset();
  StepResult step(double action);

  const VehicleState& ego() const { return ego_; }
  const VehicleState& mio() const { return mio_; }
  double gap() const { return mio_.x - ego_.x; }
  int step_count() const { return step_count_; }
  bool done() const { return done_; }
  const SimConfig& config() const { return cfg_; }

  Observation observe() const;

 private:
  ScenarioParams params_;
  SimConfig cfg_;
  VehicleState ego_, mio_;
  int step_count_ = 0;
  bool done_ = false;
  double jerk_ = 0.0;
};

// Maps a raw observation to an action in [-1, 1]. Neural policies normalize
// internally; the IDM baseline reads the raw fields directly.
using PolicyFn = std::function<double(const Observation&)>;

EpisodeResult run_episode(const PolicyFn& policy, const ScenarioParams& params,
                          const SimConfig& cfg,
                          bool keep_trajectory = true);

// Rule-based baseline: EGO driven by the full IDM against the MIO.
PolicyFn idm_policy(const SimConfig& cfg, double v_desired = 40.0);

// CSV rows `t,x_ego,v_ego,a_ego,x_mio,v_mio,d_mio,ttc,tgap,reward`,
// >= 9 significant digits.
void write_trajectory_csv(std::ostream& os, const EpisodeResult& result);

}  // namespace accsi::sim
