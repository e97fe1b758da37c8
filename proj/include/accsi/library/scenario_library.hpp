#pragma once

#include <string>
#include <vector>

#include "accsi/rng.hpp"
#include "accsi/search_space.hpp"
#include "accsi/sim/types.hpp"

namespace accsi::library {

struct LibraryEntry {
  sim::ScenarioParams params;
  double objective = 0.0;
  int generation = 0;
  std::string algo;
  bool collided = false;
};

// Persistent store of verification samples per generation. Training resets
// draw from a mixture: uniform with probability 1/2, and generation k with
// probability proportional to k+1 over the completed sets.
class ScenarioLibrary {
 public:
  ScenarioLibrary() = default;
  explicit ScenarioLibrary(SearchSpace space) : space_(std::move(space)) {}

  // k must be 0 for an empty library, or current max generation + 1.
  void add_generation(std::vector<LibraryEntry> entries, int k);

  int max_generation() const { return static_cast<int>(generations_.size()) - 1; }
  bool empty() const { return generations_.empty(); }
  const std::vector<LibraryEntry>& generation(int k) const;

  // Mixture weights for a library holding sets 0..G: index 0 is the uniform
  // component (exactly 1/2), index k+1 is generation k. Sums to 1 exactly
  // (computed from integer numerators over a common denominator).
  static std::vector<double> generation_weights(int max_gen);

  // Draws a scenario: uniform over the space, or a stored entry verbatim.
  sim::ScenarioParams sample(const SearchSpace& space, Rng& rng) const;

  // Line-delimited JSON, append-only. Header record carries format version
  // and the space bounds; every entry line carries an integrity checksum.
  void persist(const std::string& path) const;
  static ScenarioLibrary restore(const std::string& path);

  const SearchSpace& space() const { return space_; }

 private:
  SearchSpace space_ = default_scenario_space();
  std::vector<std::vector<LibraryEntry>> generations_;
};

// Optional replay restriction for ablation: keep only entries at or below
// the threshold.
std::vector<LibraryEntry> tau_filter(const std::vector<LibraryEntry>& entries,
                                     double tau);

}  // namespace accsi::library
