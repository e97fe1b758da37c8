#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "accsi/sim/types.hpp"

namespace accsi::sim {

// Desired dynamic gap d*(v, dv). dv is the closing speed v - v_lead.
inline double idm_desired_gap(double v, double dv, const SimConfig& cfg) {
  const auto& p = cfg.idm;
  const double b_abs = std::fabs(p.b);
  return p.d0 + v * p.t_safe + v * dv / (2.0 * std::sqrt(b_abs * p.alpha_max));
}

// Car-following acceleration, clamped to [a_min, alpha_max].
inline double idm_acceleration(double v, double v_d, double d, double dv,
                               const SimConfig& cfg) {
  if (d <= 0.0) {
    throw std::domain_error("idm_acceleration: degenerate gap d <= 0");
  }
  const auto& p = cfg.idm;
  const double ds = idm_desired_gap(v, dv, cfg);
  const double a =
      p.alpha_max * (1.0 - std::pow(v / v_d, p.delta) - (ds / d) * (ds / d));
  return std::clamp(a, p.a_min, p.alpha_max);
}

// Free-road form: interaction term dropped (no vehicle ahead).
inline double idm_free_road_acceleration(double v, double v_d, const SimConfig& cfg) {
  const auto& p = cfg.idm;
  const double a = p.alpha_max * (1.0 - std::pow(v / v_d, p.delta));
  return std::clamp(a, p.a_min, p.alpha_max);
}

}  // namespace accsi::sim
