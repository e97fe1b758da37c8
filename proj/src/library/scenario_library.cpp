#include "accsi/library/scenario_library.hpp"

#include <cassert>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"

#include "accsi/mathutil.hpp"

namespace accsi::library {

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json entry_payload(const LibraryEntry& e) {
  return nlohmann::json{{"algo", e.algo},
                        {"gen", e.generation},
                        {"params", e.params.to_array()},
                        {"objective", e.objective},
                        {"collided", e.collided}};
}

}  // namespace

void ScenarioLibrary::add_generation(std::vector<LibraryEntry> entries, int k) {
  const int expected = static_cast<int>(generations_.size());
  if (k != expected) {
    throw std::invalid_argument(
        "add_generation: generation index " + std::to_string(k) +
        " breaks contiguity (expected " + std::to_string(expected) + ")");
  }
  if (entries.empty()) {
    throw std::invalid_argument("add_generation: empty generation set");
  }
  for (auto& e : entries) e.generation = k;
  generations_.push_back(std::move(entries));
}

const std::vector<LibraryEntry>& ScenarioLibrary::generation(int k) const {
  if (k < 0 || k > max_generation()) {
    throw std::out_of_range("generation index out of range");
  }
  return generations_[static_cast<std::size_t>(k)];
}

std::vector<double> ScenarioLibrary::generation_weights(int max_gen) {
  if (max_gen < 0) throw std::invalid_argument("generation_weights: max_gen < 0");
  const long long g = max_gen;
  const long long tri = (g + 1) * (g + 2) / 2;  // sum of k+1 for k in 0..G
  const long long denom = 2 * tri;
  std::vector<double> w(static_cast<std::size_t>(max_gen) + 2);
  long long numerator_sum = tri;  // uniform component
  w[0] = static_cast<double>(tri) / static_cast<double>(denom);
  for (long long k = 0; k <= g; ++k) {
    w[static_cast<std::size_t>(k) + 1] =
        static_cast<double>(k + 1) / static_cast<double>(denom);
    numerator_sum += k + 1;
  }
  assert(numerator_sum == denom);  // mixture sums to 1 exactly
  (void)numerator_sum;
  return w;
}

sim::ScenarioParams ScenarioLibrary::sample(const SearchSpace& space,
                                            Rng& rng) const {
  if (generations_.empty()) {
    return sim::ScenarioParams::from_vector(space.sample_uniform(rng));
  }
  const long long g = max_generation();
  const long long tri = (g + 1) * (g + 2) / 2;
  const long long denom = 2 * tri;
  // integer category draw matches generation_weights exactly
  const auto r = static_cast<long long>(rng.uniform_int(static_cast<std::uint64_t>(denom)));
  if (r < tri) {
    return sim::ScenarioParams::from_vector(space.sample_uniform(rng));
  }
  long long acc = tri;
  for (long long k = 0; k <= g; ++k) {
    acc += k + 1;
    if (r < acc) {
      const auto& set = generations_[static_cast<std::size_t>(k)];
      return set[rng.uniform_int(set.size())].params;
    }
  }
  throw std::logic_error("ScenarioLibrary::sample: category selection failed");
}

void ScenarioLibrary::persist(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("library persist: cannot open " + path);
  nlohmann::json header{{"type", "header"},
                        {"version", kFormatVersion},
                        {"space", {{"lo", space_.lo}, {"hi", space_.hi}}}};
  out << header.dump() << "\n";
  for (const auto& gen : generations_) {
    for (const auto& e : gen) {
      nlohmann::json j = entry_payload(e);
      j["ck"] = fnv1a64_hex(j.dump());
      out << j.dump() << "\n";
    }
  }
  if (!out) throw std::runtime_error("library persist: write failed for " + path);
}

ScenarioLibrary ScenarioLibrary::restore(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("library restore: cannot open " + path);
  std::string line;
  int line_no = 0;

  auto parse_line = [&](const std::string& text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      throw std::runtime_error("library restore: corrupted line " +
                               std::to_string(line_no));
    }
  };

  if (!std::getline(in, line)) {
    throw std::runtime_error("library restore: empty file " + path);
  }
  ++line_no;
  const nlohmann::json header = parse_line(line);
  if (header.value("type", "") != "header") {
    throw std::runtime_error("library restore: missing header record");
  }
  if (header.value("version", -1) != kFormatVersion) {
    throw std::runtime_error("library restore: format version mismatch");
  }
  ScenarioLibrary lib(SearchSpace(header["space"]["lo"].get<std::vector<double>>(),
                                  header["space"]["hi"].get<std::vector<double>>()));

  std::vector<std::vector<LibraryEntry>> gens;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = parse_line(line);
    const std::string ck = j.value("ck", "");
    j.erase("ck");
    if (ck != fnv1a64_hex(j.dump())) {
      throw std::runtime_error("library restore: checksum failure at line " +
                               std::to_string(line_no));
    }
    LibraryEntry e;
    try {
      const auto p = j.at("params").get<std::array<double, 4>>();
      e.params = sim::ScenarioParams::from_array(p);
      e.objective = j.at("objective").get<double>();
      e.generation = j.at("gen").get<int>();
      e.algo = j.at("algo").get<std::string>();
      e.collided = j.at("collided").get<bool>();
    } catch (const nlohmann::json::exception&) {
      throw std::runtime_error("library restore: corrupted line " +
                               std::to_string(line_no));
    }
    if (e.generation < 0 ||
        static_cast<std::size_t>(e.generation) > gens.size()) {
      throw std::runtime_error("library restore: generation gap at line " +
                               std::to_string(line_no));
    }
    if (static_cast<std::size_t>(e.generation) == gens.size()) gens.emplace_back();
    gens[static_cast<std::size_t>(e.generation)].push_back(std::move(e));
  }
  for (std::size_t k = 0; k < gens.size(); ++k) {
    lib.add_generation(std::move(gens[k]), static_cast<int>(k));
  }
  return lib;
}

std::vector<LibraryEntry> tau_filter(const std::vector<LibraryEntry>& entries,
                                     double tau) {
  std::vector<LibraryEntry> out;
  for (const auto& e : entries) {
    if (e.objective <= tau) out.push_back(e);
  }
  return out;
}

}  // namespace accsi::library
