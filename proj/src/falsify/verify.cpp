#include "accsi/falsify/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace accsi::falsify {

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "gs") return Algorithm::GridSearch;
  if (name == "mc") return Algorithm::MonteCarlo;
  if (name == "ce") return Algorithm::CrossEntropy;
  if (name == "bo") return Algorithm::BayesOpt;
  if (name == "ams") return Algorithm::Ams;
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected gs|mc|ce|bo|ams)");
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::GridSearch: return "gs";
    case Algorithm::MonteCarlo: return "mc";
    case Algorithm::CrossEntropy: return "ce";
    case Algorithm::BayesOpt: return "bo";
    case Algorithm::Ams: return "ams";
  }
  throw std::logic_error("to_string: bad Algorithm");
}

EvalFn episode_objective(const sim::PolicyFn& policy, const sim::SimConfig& cfg) {
  return [policy, cfg](const std::vector<double>& x) {
    const auto params = sim::ScenarioParams::from_vector(x);
    const auto r = sim::run_episode(policy, params, cfg, /*keep_trajectory=*/false);
    return EvalResult{r.min_ttc, r.collided};
  };
}

RareEventEstimate run_verification(Algorithm algo, const sim::PolicyFn& policy,
                                   const SearchSpace& space, std::size_t n,
                                   double tau, std::uint64_t seed,
                                   const sim::SimConfig& cfg,
                                   const VerifyOptions& opts) {
  const EvalFn fn = episode_objective(policy, cfg);
  Rng rng(seed);
  ExecOptions exec{opts.parallel};

  switch (algo) {
    case Algorithm::GridSearch: {
      const int ppd = std::max(
          2, static_cast<int>(std::floor(std::pow(
                 static_cast<double>(n), 1.0 / static_cast<double>(space.dim())))));
      return grid_search(fn, space, ppd, tau, n, exec);
    }
    case Algorithm::MonteCarlo:
      return monte_carlo(fn, space, n, tau, rng, exec);
    case Algorithm::CrossEntropy: {
      CeOptions ce;
      ce.exec = exec;
      return cross_entropy_search(fn, space, n, opts.ce_iterations, tau, rng, ce);
    }
    case Algorithm::BayesOpt: {
      BoOptions bo;
      bo.exec = exec;
      const std::size_t n_init =
          std::max<std::size_t>(8, n / opts.bo_init_frac_denom);
      return bayes_opt(fn, space, n, n_init, tau, rng, bo);
    }
    case Algorithm::Ams: {
      AmsOptions ao;
      ao.exec = exec;
      ao.max_levels = opts.ams_max_levels;
      ao.max_evals = n;
      const auto pop = std::max<std::size_t>(
          10, static_cast<std::size_t>(opts.ams_population_frac *
                                       static_cast<double>(n)));
      return ams(fn, space, pop, opts.ams_delta, tau, rng, ao);
    }
  }
  throw std::logic_error("run_verification: bad Algorithm");
}

void write_samples_jsonl(std::ostream& os, const RareEventEstimate& est, int gen) {
  for (const auto& s : est.samples) {
    nlohmann::json j{{"algo", s.algo},     {"gen", gen},
                     {"i", s.index},       {"params", s.params},
                     {"objective", s.objective}, {"collided", s.collided}};
    os << j.dump() << "\n";
  }
  nlohmann::json summary{{"summary", true},
                         {"algo", est.algo},
                         {"gen", gen},
                         {"p_hat", est.p_hat},
                         {"tau", est.tau},
                         {"n", est.n_evals},
                         {"estimator", est.estimator},
                         {"diagnostics", est.diagnostics}};
  os << summary.dump() << "\n";
}

}  // namespace accsi::falsify
