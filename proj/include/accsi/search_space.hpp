#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "accsi/rng.hpp"

namespace accsi {

// Per-dimension box bounds for a search/scenario space.
struct SearchSpace {
  std::vector<double> lo, hi;

  SearchSpace() = default;
  SearchSpace(std::vector<double> l, std::vector<double> h)
      : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size()) {
      throw std::invalid_argument("SearchSpace: lo/hi size mismatch");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!(lo[i] < hi[i])) {
        throw std::invalid_argument("SearchSpace: requires lo < hi per dimension");
      }
    }
  }

  std::size_t dim() const { return lo.size(); }
  double width(std::size_t i) const { return hi[i] - lo[i]; }

  bool contains(const std::vector<double>& x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }

  std::vector<double> sample_uniform(Rng& rng) const {
    std::vector<double> x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
    return x;
  }

  // map to/from the unit cube
  std::vector<double> normalize(const std::vector<double>& x) const {
    std::vector<double> u(dim());
    for (std::size_t i = 0; i < dim(); ++i) u[i] = (x[i] - lo[i]) / width(i);
    return u;
  }
  std::vector<double> denormalize(const std::vector<double>& u) const {
    std::vector<double> x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = lo[i] + u[i] * width(i);
    return x;
  }
};

// Table-style default bounds for (v_ego0, d_mio0, v_mio0, v_mioT). The MIO
// velocity range mirrors the EGO range and is configurable.
inline SearchSpace default_scenario_space() {
  return SearchSpace({10.0, 10.0, 10.0, 10.0}, {40.0, 120.0, 40.0, 40.0});
}

}  // namespace accsi
