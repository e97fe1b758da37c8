#include "accsi/orchestrator/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "accsi/mathutil.hpp"
#include "accsi/sim/batch.hpp"

namespace accsi::orchestrator {

using nlohmann::json;
namespace fs = std::filesystem;

json EvalReport::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["n_scenarios"] = n_scenarios;
  j["seeds"] = seeds;
  j["generations"] = json::array();
  for (const auto& g : generations) {
    json gj;
    gj["gen"] = g.gen;
    gj["per_seed_collisions"] = g.per_seed_collisions;
    gj["mean_collisions"] = g.mean_collisions;
    gj["ratios"] = g.ratios;
    gj["mean_ratio"] = g.mean_ratio;
    gj["min_ratio"] = g.min_ratio;
    gj["max_ratio"] = g.max_ratio;
    j["generations"].push_back(gj);
  }
  return j;
}

EvalReport evaluate_uniform(const std::vector<sim::PolicyFn>& gen_policies,
                            const SearchSpace& space, const sim::SimConfig& cfg,
                            int n_scenarios, const std::vector<std::uint64_t>& seeds,
                            const std::string& config_hash, bool parallel) {
  if (gen_policies.empty()) throw std::invalid_argument("evaluate_uniform: no policies");
  if (n_scenarios <= 0) throw std::invalid_argument("evaluate_uniform: n_scenarios must be positive");
  EvalReport rep;
  rep.config_hash = config_hash;
  rep.n_scenarios = n_scenarios;
  rep.seeds = seeds;

  for (std::size_t gi = 0; gi < gen_policies.size(); ++gi) {
    GenerationEval ge;
    ge.gen = static_cast<int>(gi);
    for (std::uint64_t seed : seeds) {
      Rng rng = Rng::for_stream(seed, 9000 + gi);
      std::vector<sim::ScenarioParams> scen;
      scen.reserve(n_scenarios);
      for (int i = 0; i < n_scenarios; ++i)
        scen.push_back(sim::ScenarioParams::from_vector(space.sample_uniform(rng)));
      auto outcomes = parallel
                          ? sim::evaluate_batch(gen_policies[gi], scen, cfg)
                          : sim::evaluate_batch_serial(gen_policies[gi], scen, cfg);
      long long c = 0;
      for (const auto& o : outcomes) c += o.collided ? 1 : 0;
      ge.per_seed_collisions.push_back(c);
    }
    double sum = 0.0;
    for (long long c : ge.per_seed_collisions) sum += static_cast<double>(c);
    ge.mean_collisions = sum / static_cast<double>(ge.per_seed_collisions.size());
    rep.generations.push_back(std::move(ge));
  }

  // Ratios normalized to the Generation-0 seed mean. If the baseline never
  // collides the ratio is defined as the raw count (denominator 1).
  double base = rep.generations.front().mean_collisions;
  double denom = base > 0.0 ? base : 1.0;
  for (auto& g : rep.generations) {
    for (long long c : g.per_seed_collisions)
      g.ratios.push_back(static_cast<double>(c) / denom);
    g.mean_ratio = g.mean_collisions / denom;
    g.min_ratio = *std::min_element(g.ratios.begin(), g.ratios.end());
    g.max_ratio = *std::max_element(g.ratios.begin(), g.ratios.end());
  }
  return rep;
}

bool kinematically_survivable(const sim::ScenarioParams& p, const sim::SimConfig& cfg) {
  // Worst case: the lead holds its slower speed while the ego brakes at
  // a_min from v_ego0. Relative stopping distance (v_rel^2 / (2*|a_min|))
  // plus one step of closing at the initial rate must fit in the gap.
  double v_lead = std::min(p.v_mio0, p.v_mioT);
  double v_rel = std::max(0.0, p.v_ego0 - v_lead);
  double brake = std::abs(cfg.idm.a_min);
  double need = v_rel * v_rel / (2.0 * brake) + cfg.dt * std::max(0.0, p.v_ego0 - p.v_mio0) + 0.5;
  return p.d_mio0 > need;
}

RiskySuite build_risky_suite(const std::vector<std::string>& verify_files,
                             double tau_risk, std::size_t count,
                             const sim::SimConfig& cfg, Rng& rng) {
  std::vector<sim::ScenarioParams> pool;
  std::size_t n_seen = 0, n_risky = 0, n_unsurvivable = 0;
  for (const auto& path : verify_files) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("build_risky_suite: cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      if (!j.contains("params") || !j.contains("objective")) continue;  // summary line
      ++n_seen;
      if (j["objective"].get<double>() >= tau_risk) continue;
      ++n_risky;
      auto v = j["params"].get<std::vector<double>>();
      auto p = sim::ScenarioParams::from_vector(v);
      if (!kinematically_survivable(p, cfg)) {
        ++n_unsurvivable;
        continue;
      }
      pool.push_back(p);
    }
  }

  RiskySuite suite;
  if (pool.size() <= count) {
    suite.scenarios = pool;
  } else {
    // Partial Fisher-Yates: the first `count` entries are a uniform subsample.
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    suite.scenarios.assign(pool.begin(), pool.begin() + count);
  }
  suite.meta = {{"tau_risk", tau_risk},
                {"requested", count},
                {"emitted", suite.scenarios.size()},
                {"pool_size", pool.size()},
                {"samples_scanned", n_seen},
                {"risky_seen", n_risky},
                {"filtered_unsurvivable", n_unsurvivable}};
  return suite;
}

void write_suite(const std::string& path, const RiskySuite& suite) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_suite: cannot open " + path);
  json header = {{"type", "risky_suite"}, {"version", 1}, {"meta", suite.meta}};
  out << header.dump() << "\n";
  for (std::size_t i = 0; i < suite.scenarios.size(); ++i) {
    const auto& p = suite.scenarios[i];
    json j = {{"i", i},
              {"params", {p.v_ego0, p.d_mio0, p.v_mio0, p.v_mioT}}};
    out << j.dump() << "\n";
  }
}

RiskySuite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_suite: cannot open " + path);
  RiskySuite suite;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("load_suite: " + path + ":" + std::to_string(lineno) +
                               ": " + e.what());
    }
    if (j.contains("type")) {
      if (j["type"] != "risky_suite")
        throw std::runtime_error("load_suite: unexpected file type in " + path);
      if (j.contains("meta")) suite.meta = j["meta"];
      continue;
    }
    auto v = j.at("params").get<std::vector<double>>();
    suite.scenarios.push_back(sim::ScenarioParams::from_vector(v));
  }
  return suite;
}

json SuiteEval::to_json() const {
  json j;
  j["per_seed_collisions"] = per_seed_collisions;
  j["mean_collisions"] = mean_collisions;
  j["std_collisions"] = std_collisions;
  j["min_ttcs"] = min_ttcs;
  j["mean_tgaps"] = mean_tgaps;
  return j;
}

SuiteEval evaluate_suite(
    const std::function<sim::PolicyFn(std::uint64_t seed)>& policy_for_seed,
    const std::vector<sim::ScenarioParams>& suite,
    const std::vector<std::uint64_t>& seeds, const sim::SimConfig& cfg,
    bool parallel) {
  if (suite.empty()) throw std::invalid_argument("evaluate_suite: empty suite");
  if (seeds.empty()) throw std::invalid_argument("evaluate_suite: no seeds");
  SuiteEval ev;
  bool first_seed = true;
  for (std::uint64_t seed : seeds) {
    auto policy = policy_for_seed(seed);
    long long c = 0;
    if (first_seed) {
      // Distribution stats come from the first seed's episodes; those need
      // full trajectories, so run episodes directly.
      for (const auto& p : suite) {
        auto res = sim::run_episode(policy, p, cfg);
        c += res.collided ? 1 : 0;
        ev.min_ttcs.push_back(res.min_ttc);
        double tg = 0.0;
        for (const auto& row : res.trajectory) tg += row.tgap;
        ev.mean_tgaps.push_back(tg / static_cast<double>(res.trajectory.size()));
      }
      first_seed = false;
    } else {
      auto outcomes = parallel ? sim::evaluate_batch(policy, suite, cfg)
                               : sim::evaluate_batch_serial(policy, suite, cfg);
      for (const auto& o : outcomes) c += o.collided ? 1 : 0;
    }
    ev.per_seed_collisions.push_back(c);
  }
  std::vector<double> cs(ev.per_seed_collisions.begin(), ev.per_seed_collisions.end());
  ev.mean_collisions = mean(cs);
  ev.std_collisions = stddev(cs);
  return ev;
}

void export_trajectories(const sim::PolicyFn& policy,
                         const std::vector<sim::ScenarioParams>& scenarios,
                         const sim::SimConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream idx(fs::path(out_dir) / "index.jsonl");
  if (!idx) throw std::runtime_error("export_trajectories: cannot open index in " + out_dir);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& p = scenarios[i];
    auto res = sim::run_episode(policy, p, cfg);
    std::ostringstream name;
    name << "traj_" << i << ".csv";
    std::ofstream csv(fs::path(out_dir) / name.str());
    if (!csv) throw std::runtime_error("export_trajectories: cannot open " + name.str());
    sim::write_trajectory_csv(csv, res);
    json j = {{"i", i},
              {"file", name.str()},
              {"params", {p.v_ego0, p.d_mio0, p.v_mio0, p.v_mioT}},
              {"min_ttc", res.min_ttc},
              {"collided", res.collided},
              {"total_reward", res.total_reward},
              {"steps", res.trajectory.size() - 1}};
    idx << j.dump() << "\n";
  }
}

}  // namespace accsi::orchestrator
