#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "accsi/falsify/verify.hpp"
#include "accsi/library/scenario_library.hpp"
#include "accsi/orchestrator/config.hpp"
#include "accsi/orchestrator/eval.hpp"
#include "accsi/orchestrator/loop.hpp"
#include "accsi/policy/mlp.hpp"
#include "accsi/trainer/ppo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace accsi;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  bool desk_scale = false;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "JSON run-config file");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--out", c.out, "output path (overrides config)");
  cmd->add_flag("--desk-scale", c.desk_scale, "CI-sized profile");
}

orchestrator::RunConfig make_config(const CommonOpts& c) {
  orchestrator::RunConfig cfg;
  if (!c.config_path.empty()) cfg = orchestrator::RunConfig::load_file(c.config_path);
  if (c.desk_scale) cfg.apply_desk_scale();
  if (!c.out.empty()) cfg.out_dir = c.out;
  cfg.validate();
  return cfg;
}

// Draws fresh actions from the policy's Gaussian; stateful, serial use only.
sim::PolicyFn stochastic_policy(const policy::PolicyParams& params, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(Rng::for_stream(seed, 7777));
  return [params, rng](const sim::Observation& o) {
    return policy::sample_action(sim::normalize_obs(o), params, *rng).action;
  };
}

std::vector<std::string> discover_verify_files(const std::string& run_dir) {
  std::vector<std::string> files;
  for (int gen = 0;; ++gen) {
    fs::path p = fs::path(run_dir) / ("gen" + std::to_string(gen)) / "verify.jsonl";
    if (!fs::exists(p)) break;
    files.push_back(p.string());
  }
  return files;
}

int cmd_train(const CommonOpts& c) {
  auto cfg = make_config(c);
  fs::create_directories(cfg.out_dir);
  Rng rng = Rng::for_stream(c.seed, 0);
  auto init = policy::PolicyParams::random_init(rng);
  trainer::ScenarioSampler sampler = [&cfg](Rng& r) {
    return sim::ScenarioParams::from_vector(cfg.space.sample_uniform(r));
  };
  auto result = trainer::train_generation(init, sampler, cfg.train, cfg.sim, rng);
  fs::path policy_path = fs::path(cfg.out_dir) / "policy.bin";
  policy::save(result.params, policy_path.string());
  std::ofstream m(fs::path(cfg.out_dir) / "metrics.jsonl", std::ios::trunc);
  m << json{{"type", "header"}, {"config_hash", cfg.config_hash()}}.dump() << "\n";
  for (const auto& it : result.metrics) {
    m << json{{"iter", it.iter},         {"steps", it.steps},
              {"mean_return", it.mean_return}, {"collision_rate", it.collision_rate},
              {"kl", it.kl},             {"clip_frac", it.clip_frac},
              {"loss", it.loss}}
             .dump()
      << "\n";
  }
  std::cout << json{{"policy", policy_path.string()},
                    {"iterations", result.metrics.size()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_verify(const CommonOpts& c, const std::string& algo_name,
               const std::string& policy_path, bool use_idm) {
  auto cfg = make_config(c);
  fs::create_directories(cfg.out_dir);
  sim::PolicyFn pol;
  if (use_idm) {
    pol = sim::idm_policy(cfg.sim);
  } else if (!policy_path.empty()) {
    pol = policy::deterministic_policy(policy::load(policy_path));
  } else {
    throw std::invalid_argument("verify: provide --policy <file> or --idm");
  }
  auto algo = falsify::algorithm_from_string(algo_name);
  falsify::VerifyOptions vo;
  vo.parallel = cfg.parallel;
  auto est = falsify::run_verification(algo, pol, cfg.space, cfg.n_verification,
                                       cfg.tau, c.seed, cfg.sim, vo);
  fs::path out_path = fs::path(cfg.out_dir) / "verify.jsonl";
  std::ofstream out(out_path, std::ios::trunc);
  falsify::write_samples_jsonl(out, est, 0);
  std::cout << json{{"algo", falsify::to_string(algo)},
                    {"p_hat", est.p_hat},
                    {"n_evals", est.n_evals},
                    {"out", out_path.string()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_loop(const CommonOpts& c) {
  auto cfg = make_config(c);
  auto result = orchestrator::run_loop(cfg, c.seed);
  std::cout << json{{"policies", result.policy_paths},
                    {"library", result.library_path}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_eval_uniform(const CommonOpts& c, const std::string& run_dir,
                     bool include_idm) {
  auto cfg = make_config(c);
  std::vector<sim::PolicyFn> policies;
  int n_gens = 0;
  for (int gen = 0;; ++gen) {
    fs::path p = fs::path(run_dir) / ("gen" + std::to_string(gen)) / "policy.bin";
    if (!fs::exists(p)) break;
    policies.push_back(policy::deterministic_policy(policy::load(p.string())));
    ++n_gens;
  }
  if (policies.empty())
    throw std::runtime_error("eval-uniform: no genN/policy.bin under " + run_dir);
  auto rep = orchestrator::evaluate_uniform(policies, cfg.space, cfg.sim,
                                            cfg.eval_scenarios, cfg.seeds,
                                            cfg.config_hash(), cfg.parallel);
  json out = rep.to_json();
  if (include_idm) {
    std::vector<sim::PolicyFn> idm{sim::idm_policy(cfg.sim)};
    auto base = orchestrator::evaluate_uniform(idm, cfg.space, cfg.sim,
                                               cfg.eval_scenarios, cfg.seeds,
                                               cfg.config_hash(), cfg.parallel);
    out["idm_baseline"] = base.to_json()["generations"][0];
  }
  fs::path out_path = c.out.empty()
                          ? fs::path(run_dir) / "eval_uniform.json"
                          : fs::path(c.out);
  std::ofstream f(out_path, std::ios::trunc);
  f << out.dump(2) << "\n";
  std::cout << json{{"out", out_path.string()}, {"generations", n_gens}}.dump() << "\n";
  return 0;
}

int cmd_build_suite(const CommonOpts& c, std::string run_dir,
                    std::vector<std::string> verify_files, double tau_risk,
                    std::size_t count) {
  auto cfg = make_config(c);
  if (!run_dir.empty()) {
    auto found = discover_verify_files(run_dir);
    verify_files.insert(verify_files.end(), found.begin(), found.end());
  }
  if (verify_files.empty())
    throw std::invalid_argument("build-suite: no verify files (use --run or --verify-file)");
  Rng rng = Rng::for_stream(c.seed, 4242);
  auto suite = orchestrator::build_risky_suite(verify_files, tau_risk, count, cfg.sim, rng);
  fs::path out_path = c.out.empty() ? fs::path("suite.jsonl") : fs::path(c.out);
  orchestrator::write_suite(out_path.string(), suite);
  if (suite.scenarios.size() < count) {
    std::cerr << json{{"warning", "risky-suite shortfall"},
                      {"requested", count},
                      {"emitted", suite.scenarios.size()}}
                     .dump()
              << "\n";
  }
  std::cout << json{{"out", out_path.string()}, {"meta", suite.meta}}.dump() << "\n";
  return 0;
}

int cmd_eval_suite(const CommonOpts& c, const std::string& suite_path,
                   const std::string& policy_path, bool use_idm, bool stochastic) {
  auto cfg = make_config(c);
  auto suite = orchestrator::load_suite(suite_path);
  if (suite.scenarios.empty()) throw std::runtime_error("eval-suite: empty suite");
  std::function<sim::PolicyFn(std::uint64_t)> policy_for_seed;
  bool parallel = cfg.parallel;
  if (use_idm) {
    policy_for_seed = [&cfg](std::uint64_t) { return sim::idm_policy(cfg.sim); };
  } else if (!policy_path.empty()) {
    auto params = policy::load(policy_path);
    if (stochastic) {
      policy_for_seed = [params](std::uint64_t seed) {
        return stochastic_policy(params, seed);
      };
      parallel = false;  // stateful sampler
    } else {
      policy_for_seed = [params](std::uint64_t) {
        return policy::deterministic_policy(params);
      };
    }
  } else {
    throw std::invalid_argument("eval-suite: provide --policy <file> or --idm");
  }
  auto ev = orchestrator::evaluate_suite(policy_for_seed, suite.scenarios,
                                         cfg.seeds, cfg.sim, parallel);
  json out = ev.to_json();
  out["config_hash"] = cfg.config_hash();
  out["suite"] = suite_path;
  fs::path out_path = c.out.empty() ? fs::path("eval_suite.json") : fs::path(c.out);
  std::ofstream f(out_path, std::ios::trunc);
  f << out.dump(2) << "\n";
  std::cout << json{{"out", out_path.string()},
                    {"mean_collisions", ev.mean_collisions},
                    {"std_collisions", ev.std_collisions}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_export_traj(const CommonOpts& c, const std::string& suite_path,
                    const std::string& policy_path, bool use_idm,
                    std::size_t limit) {
  auto cfg = make_config(c);
  sim::PolicyFn pol;
  if (use_idm) {
    pol = sim::idm_policy(cfg.sim);
  } else if (!policy_path.empty()) {
    pol = policy::deterministic_policy(policy::load(policy_path));
  } else {
    throw std::invalid_argument("export-traj: provide --policy <file> or --idm");
  }
  auto suite = orchestrator::load_suite(suite_path);
  if (limit > 0 && suite.scenarios.size() > limit) suite.scenarios.resize(limit);
  std::string out_dir = c.out.empty() ? "trajectories" : c.out;
  orchestrator::export_trajectories(pol, suite.scenarios, cfg.sim, out_dir);
  std::cout << json{{"out", out_dir}, {"count", suite.scenarios.size()}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"longitudinal ACC policy training, falsification and evaluation"};
  app.require_subcommand(1);

  CommonOpts c;

  auto* train = app.add_subcommand("train", "train one policy generation on uniform scenarios");
  add_common(train, c);

  auto* verify = app.add_subcommand("verify", "run one falsification campaign");
  add_common(verify, c);
  std::string algo = "mc", policy_path;
  bool use_idm = false;
  verify->add_option("--algo", algo, "gs|mc|ce|bo|ams")->required();
  verify->add_option("--policy", policy_path, "policy binary");
  verify->add_flag("--idm", use_idm, "verify the IDM baseline");

  auto* loop = app.add_subcommand("loop", "full multi-generation train/verify/store cycle");
  add_common(loop, c);

  auto* eval_uniform = app.add_subcommand("eval-uniform", "collision ratios on uniform scenarios");
  add_common(eval_uniform, c);
  std::string run_dir;
  bool include_idm = false;
  eval_uniform->add_option("--run", run_dir, "loop output directory")->required();
  eval_uniform->add_flag("--idm", include_idm, "also evaluate the IDM baseline");

  auto* build_suite = app.add_subcommand("build-suite", "pool risky verification samples into a suite");
  add_common(build_suite, c);
  std::string bs_run;
  std::vector<std::string> verify_files;
  double tau_risk = 5.0;
  std::size_t count = 1000;
  build_suite->add_option("--run", bs_run, "loop output directory to scan");
  build_suite->add_option("--verify-file", verify_files, "explicit verify.jsonl files");
  build_suite->add_option("--tau-risk", tau_risk, "min-TTC risk threshold [s]");
  build_suite->add_option("--count", count, "suite size");

  auto* eval_suite = app.add_subcommand("eval-suite", "per-seed collisions on a scenario suite");
  add_common(eval_suite, c);
  std::string es_suite, es_policy;
  bool es_idm = false, es_stochastic = false;
  eval_suite->add_option("--suite", es_suite, "suite file")->required();
  eval_suite->add_option("--policy", es_policy, "policy binary");
  eval_suite->add_flag("--idm", es_idm, "evaluate the IDM baseline");
  eval_suite->add_flag("--stochastic", es_stochastic, "sample actions instead of acting on the mean");

  auto* export_traj = app.add_subcommand("export-traj", "write per-scenario trajectory CSVs");
  add_common(export_traj, c);
  std::string et_suite, et_policy;
  bool et_idm = false;
  std::size_t et_limit = 0;
  export_traj->add_option("--suite", et_suite, "suite file")->required();
  export_traj->add_option("--policy", et_policy, "policy binary");
  export_traj->add_flag("--idm", et_idm, "use the IDM baseline");
  export_traj->add_option("--limit", et_limit, "export at most N scenarios (0 = all)");

  CLI11_PARSE(app, argc, argv);

  std::string active = app.get_subcommands().front()->get_name();
  try {
    if (train->parsed()) return cmd_train(c);
    if (verify->parsed()) return cmd_verify(c, algo, policy_path, use_idm);
    if (loop->parsed()) return cmd_loop(c);
    if (eval_uniform->parsed()) return cmd_eval_uniform(c, run_dir, include_idm);
    if (build_suite->parsed())
      return cmd_build_suite(c, bs_run, verify_files, tau_risk, count);
    if (eval_suite->parsed())
      return cmd_eval_suite(c, es_suite, es_policy, es_idm, es_stochastic);
    if (export_traj->parsed())
      return cmd_export_traj(c, et_suite, et_policy, et_idm, et_limit);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"command", active}}.dump() << "\n";
    return 1;
  }
  std::cerr << json{{"error", "no subcommand"}, {"command", ""}}.dump() << "\n";
  return 2;
}
