#include "accsi/orchestrator/loop.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "accsi/falsify/verify.hpp"
#include "accsi/library/scenario_library.hpp"
#include "accsi/policy/mlp.hpp"

namespace accsi::orchestrator {

namespace fs = std::filesystem;

namespace {

struct RunState {
  std::string config_hash;
  nlohmann::json completed = nlohmann::json::object();

  static RunState load(const fs::path& path) {
    RunState st;
    std::ifstream in(path);
    if (!in) return st;
    nlohmann::json j;
    in >> j;
    st.config_hash = j.value("config_hash", "");
    st.completed = j.value("completed", nlohmann::json::object());
    return st;
  }

  void save(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    nlohmann::json j{{"config_hash", config_hash}, {"completed", completed}};
    out << j.dump(2) << "\n";
  }

  bool done(const std::string& stage) const {
    return completed.value(stage, false);
  }
};

void write_metrics(const fs::path& path, const std::string& config_hash,
                   const std::vector<trainer::IterationMetrics>& metrics) {
  std::ofstream out(path, std::ios::trunc);
  out << nlohmann::json{{"type", "header"}, {"config_hash", config_hash}}.dump()
      << "\n";
  for (const auto& m : metrics) {
    out << nlohmann::json{{"iter", m.iter},
                          {"steps", m.steps},
                          {"mean_return", m.mean_return},
                          {"collision_rate", m.collision_rate},
                          {"kl", m.kl},
                          {"clip_frac", m.clip_frac},
                          {"loss", m.loss}}
               .dump()
        << "\n";
  }
}

}  // namespace

LoopResult run_loop(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  const fs::path out(config.out_dir);
  fs::create_directories(out);

  const std::string hash = config.config_hash();
  const fs::path state_path = out / "state.json";
  RunState state = RunState::load(state_path);
  if (!state.config_hash.empty() && state.config_hash != hash) {
    throw std::runtime_error(
        "run_loop: output directory belongs to a different config (hash " +
        state.config_hash + " != " + hash + ")");
  }
  state.config_hash = hash;

  const falsify::Algorithm algo = falsify::algorithm_from_string(config.algo);
  const fs::path library_path = out / "library.jsonl";
  library::ScenarioLibrary lib(config.space);
  if (fs::exists(library_path)) {
    lib = library::ScenarioLibrary::restore(library_path.string());
  }

  LoopResult result;
  result.library_path = library_path.string();

  for (int gen = 0; gen <= config.generations; ++gen) {
    const fs::path gen_dir = out / ("gen" + std::to_string(gen));
    fs::create_directories(gen_dir);
    const fs::path policy_path = gen_dir / "policy.bin";
    result.policy_paths.push_back(policy_path.string());

    const std::string train_stage = "gen" + std::to_string(gen) + "/train";
    const std::string verify_stage = "gen" + std::to_string(gen) + "/verify";
    const std::string store_stage = "gen" + std::to_string(gen) + "/store";

    // Stage I/IV: train (transfer-loaded after generation 0)
    if (!state.done(train_stage)) {
      Rng train_rng = Rng::for_stream(seed, 3 * static_cast<std::uint64_t>(gen));
      policy::PolicyParams init =
          (gen == 0)
              ? policy::PolicyParams::random_init(train_rng)
              : policy::load((out / ("gen" + std::to_string(gen - 1)) / "policy.bin")
                                 .string());
      // generation k trains against library sets 0..k-1
      const trainer::ScenarioSampler sampler = [&](Rng& rng) {
        return lib.sample(config.space, rng);
      };
      auto trained =
          trainer::train_generation(init, sampler, config.train, config.sim, train_rng);
      policy::save(trained.params, policy_path.string());
      write_metrics(gen_dir / "metrics.jsonl", hash, trained.metrics);
      state.completed[train_stage] = true;
      state.save(state_path);
    }

    // Stage II: verify
    const fs::path verify_path = gen_dir / "verify.jsonl";
    if (!state.done(verify_stage)) {
      const auto params = policy::load(policy_path.string());
      falsify::VerifyOptions vo;
      vo.parallel = config.parallel;
      const auto est = falsify::run_verification(
          algo, policy::deterministic_policy(params), config.space,
          config.n_verification, config.tau,
          splitmix64(seed) ^ splitmix64(3 * static_cast<std::uint64_t>(gen) + 1),
          config.sim, vo);
      std::ofstream vout(verify_path, std::ios::trunc);
      falsify::write_samples_jsonl(vout, est, gen);
      state.completed[verify_stage] = true;
      state.save(state_path);
    }

    // Stage III: store
    if (!state.done(store_stage)) {
      // re-read the verify artifact so resume never depends on memory
      std::ifstream vin(verify_path);
      if (!vin) throw std::runtime_error("run_loop: missing " + verify_path.string());
      std::vector<library::LibraryEntry> entries;
      std::string line;
      while (std::getline(vin, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        if (j.value("summary", false)) continue;
        entries.push_back(library::LibraryEntry{
            sim::ScenarioParams::from_vector(j.at("params").get<std::vector<double>>()),
            j.at("objective").get<double>(), gen, j.at("algo").get<std::string>(),
            j.at("collided").get<bool>()});
      }
      lib.add_generation(std::move(entries), gen);
      lib.persist(library_path.string());
      state.completed[store_stage] = true;
      state.save(state_path);
    }
  }
  return result;
}

}  // namespace accsi::orchestrator
