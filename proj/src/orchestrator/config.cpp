#include "accsi/orchestrator/config.hpp"

#include <fstream>
#include <stdexcept>

#include "accsi/mathutil.hpp"

namespace accsi::orchestrator {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  maybe(j, "algo", c.algo);
  maybe(j, "generations", c.generations);
  maybe(j, "n_verification", c.n_verification);
  maybe(j, "tau", c.tau);
  maybe(j, "seeds", c.seeds);
  maybe(j, "eval_scenarios", c.eval_scenarios);
  maybe(j, "out", c.out_dir);
  maybe(j, "parallel", c.parallel);
  if (j.contains("space")) {
    c.space = SearchSpace(j["space"]["lo"].get<std::vector<double>>(),
                          j["space"]["hi"].get<std::vector<double>>());
  }
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    maybe(s, "dt", c.sim.dt);
    maybe(s, "horizon", c.sim.horizon);
    maybe(s, "ttc_cap", c.sim.ttc_cap);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    maybe(t, "gamma", c.train.gamma);
    maybe(t, "lambda", c.train.lambda);
    maybe(t, "lr", c.train.lr);
    maybe(t, "clip_eps", c.train.clip_eps);
    maybe(t, "beta_kl", c.train.beta_kl);
    maybe(t, "value_coef", c.train.value_coef);
    maybe(t, "entropy_coef", c.train.entropy_coef);
    maybe(t, "steps_per_generation", c.train.steps_per_generation);
    maybe(t, "rollout_steps", c.train.rollout_steps);
    maybe(t, "epochs", c.train.epochs);
    maybe(t, "minibatch", c.train.minibatch);
  }
  c.validate();
  return c;
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{
      {"algo", algo},
      {"generations", generations},
      {"n_verification", n_verification},
      {"tau", tau},
      {"seeds", seeds},
      {"eval_scenarios", eval_scenarios},
      {"out", out_dir},
      {"parallel", parallel},
      {"space", {{"lo", space.lo}, {"hi", space.hi}}},
      {"sim",
       {{"dt", sim.dt}, {"horizon", sim.horizon}, {"ttc_cap", sim.ttc_cap}}},
      {"train",
       {{"gamma", train.gamma},
        {"lambda", train.lambda},
        {"lr", train.lr},
        {"clip_eps", train.clip_eps},
        {"beta_kl", train.beta_kl},
        {"value_coef", train.value_coef},
        {"entropy_coef", train.entropy_coef},
        {"steps_per_generation", train.steps_per_generation},
        {"rollout_steps", train.rollout_steps},
        {"epochs", train.epochs},
        {"minibatch", train.minibatch}}}};
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::apply_desk_scale() {
  train.steps_per_generation = 50000;
  n_verification = 512;
  eval_scenarios = 500;
  seeds = {0, 1, 2, 3, 4};
}

void RunConfig::validate() const {
  if (generations < 0) throw std::invalid_argument("config: generations must be >= 0");
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  if (space.dim() != 4) throw std::invalid_argument("config: space must be 4-D");
  if (sim.dt <= 0.0 || sim.horizon <= 0) {
    throw std::invalid_argument("config: invalid simulator timing");
  }
  if (!(train.gamma >= 0.0 && train.gamma < 1.0)) {
    throw std::invalid_argument("config: gamma must be in [0,1)");
  }
  if (train.clip_eps <= 0.0 || train.lr <= 0.0) {
    throw std::invalid_argument("config: clip_eps and lr must be positive");
  }
}

std::string RunConfig::config_hash() const {
  // out_dir excluded so relocated runs keep the same identity
  nlohmann::json j = to_json();
  j.erase("out");
  return fnv1a64_hex(j.dump());
}

}  // namespace accsi::orchestrator
