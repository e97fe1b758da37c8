#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace accsi::sim {

// One ACC scenario: the 4-D validation vector.
struct ScenarioParams {
  double v_ego0 = 20.0;  // initial EGO velocity (m/s)
  double d_mio0 = 60.0;  // initial bumper-to-bumper gap to MIO (m)
  double v_mio0 = 20.0;  // initial MIO velocity (m/s)
  double v_mioT = 20.0;  // MIO desired/target velocity (m/s)

  std::array<double, 4> to_array() const { return {v_ego0, d_mio0, v_mio0, v_mioT}; }
  static ScenarioParams from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
  static ScenarioParams from_vector(const std::vector<double>& v);
};

struct VehicleState {
  double x = 0.0;       // longitudinal position (m)
  double v = 0.0;       // velocity (m/s)
  double a = 0.0;       // acceleration (m/s^2)
  double a_prev = 0.0;  // previous-step acceleration (m/s^2)
};

// Raw (unclamped-source, clamped on construction) observation fields.
struct Observation {
  double v_ego = 0.0;   // m/s,   [10, 40]
  double a_ego = 0.0;   // m/s^2, [-4, 4]
  double jerk = 0.0;    // m/s^3, [-8, 8]
  double d_mio = 0.0;   // m,     [10, 120]
  double dv_mio = 0.0;  // m/s,   [-40, 40], v_mio - v_ego
};

struct IdmParams {
  double alpha_max = 4.0;  // m/s^2
  double delta = 4.0;      // acceleration exponent
  double d0 = 3.0;         // minimum gap (m)
  double b = -2.0;         // desired deceleration (m/s^2)
  double t_safe = 1.5;     // safe headway time (s)
  double a_min = -4.0;     // braking limit (m/s^2)
};

struct RewardParams {
  double c_jerk = -0.5;
  double c_speed = 5.0;
  double collision_penalty = -10.0;
  double v_max = 40.0;
};

struct SimConfig {
  double dt = 0.1;     // 10 Hz
  int horizon = 250;   // steps per episode
  IdmParams idm;
  RewardParams reward;
  double ttc_cap = 100.0;  // stand-in for "no closing speed"
};

struct TrajectoryPoint {
  double t, x_ego, v_ego, a_ego, x_mio, v_mio, d_mio, ttc, tgap, reward;
};

enum class DoneReason { NotDone, Collision, HorizonReached };

struct EpisodeResult {
  double min_ttc = 0.0;
  bool collided = false;
  int steps = 0;
  double total_reward = 0.0;
  std::vector<TrajectoryPoint> trajectory;  // row 0 is the initial state
};

}  // namespace accsi::sim
