#include <cmath>
#include <sstream>

#include "doctest.h"

#include "accsi/falsify/algorithms.hpp"
#include "accsi/falsify/bo.hpp"
#include "accsi/falsify/gp.hpp"
#include "accsi/falsify/verify.hpp"
#include "accsi/mathutil.hpp"
#include "accsi/rng.hpp"

using namespace accsi;
using namespace accsi::falsify;

namespace {

SearchSpace unit_interval() { return SearchSpace{{0.0}, {1.0}}; }

// F(u) = Phi^-1(u): uniform input maps to a standard normal output, so
// P(F <= tau) = Phi(tau) analytically.
EvalFn normal_quantile_fn() {
  return [](const std::vector<double>& x) {
    double u = std::clamp(x[0], 1e-15, 1.0 - 1e-15);
    return EvalResult{norm_quantile(u), false};
  };
}

EvalFn identity_fn() {
  return [](const std::vector<double>& x) { return EvalResult{x[0], false}; };
}

}  // namespace

TEST_CASE("grid search 1-D lattice") {
  auto est = grid_search(identity_fn(), unit_interval(), 5, 0.25, 100);
  // lattice {0, .25, .5, .75, 1}: two values <= 0.25
  CHECK(est.p_hat == doctest::Approx(2.0 / 5.0));
  CHECK(est.n_evals == 5);
  CHECK(est.samples.size() == 5);
  CHECK(est.estimator == "indicator");
}

TEST_CASE("grid search constant above tau") {
  auto fn = [](const std::vector<double>&) { return EvalResult{10.0, false}; };
  auto est = grid_search(fn, unit_interval(), 7, 1.0, 10);
  CHECK(est.p_hat == doctest::Approx(0.0));
}

TEST_CASE("grid search refuses before evaluating when over budget") {
  int calls = 0;
  EvalFn fn = [&calls](const std::vector<double>& x) {
    ++calls;
    return EvalResult{x[0], false};
  };
  CHECK_THROWS(grid_search(fn, unit_interval(), 101, 0.5, 100));
  CHECK(calls == 0);
}

TEST_CASE("grid search 4-D budget arithmetic") {
  SearchSpace s4{{0, 0, 0, 0}, {1, 1, 1, 1}};
  auto fn = [](const std::vector<double>& x) {
    return EvalResult{x[0] + x[1] + x[2] + x[3], false};
  };
  auto est = grid_search(fn, s4, 8, 0.5, 8192);
  CHECK(est.n_evals == 4096);
}

TEST_CASE("monte carlo analytic benchmark") {
  Rng rng(123);
  auto est = monte_carlo(identity_fn(), unit_interval(), 10000, 0.05, rng);
  CHECK(est.n_evals == 10000);
  CHECK(std::abs(est.p_hat - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / 10000.0));
  CHECK(est.diagnostics.contains("std_error"));
  CHECK(est.estimator == "indicator");
}

TEST_CASE("monte carlo always below tau") {
  Rng rng(5);
  auto fn = [](const std::vector<double>&) { return EvalResult{-1.0, true}; };
  auto est = monte_carlo(fn, unit_interval(), 100, 0.0, rng);
  CHECK(est.p_hat == doctest::Approx(1.0));
}

TEST_CASE("truncated normal density normalizes and samples stay in bounds") {
  Rng rng(9);
  double lo = 0.0, hi = 1.0, mean = 0.8, std = 0.5;
  // numeric integral of the pdf over the support
  const int m = 20000;
  double integral = 0.0;
  for (int i = 0; i < m; ++i) {
    double x = lo + (hi - lo) * (i + 0.5) / m;
    integral += trunc_normal_pdf(x, mean, std, lo, hi) * (hi - lo) / m;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
  for (int i = 0; i < 1000; ++i) {
    double x = trunc_normal_sample(mean, std, lo, hi, rng);
    CHECK(x >= lo);
    CHECK(x <= hi);
  }
}

TEST_CASE("cross entropy on the 3-sigma normal tail") {
  // true p = Phi(-3) = 1.3499e-3
  const double true_p = norm_cdf(-3.0);
  const double tau = -3.0;
  Rng rng(77);
  auto est = cross_entropy_search(normal_quantile_fn(), unit_interval(), 2000, 8,
                                  tau, rng);
  CHECK(est.n_evals <= 2000);
  CHECK(est.estimator == "importance_weighted");
  CHECK(est.p_hat > true_p / 3.0);
  CHECK(est.p_hat < true_p * 3.0);
  CHECK(est.diagnostics.contains("trace"));
}

TEST_CASE("cross entropy constant objective") {
  Rng rng(3);
  auto fn = [](const std::vector<double>&) { return EvalResult{5.0, false}; };
  auto lo = cross_entropy_search(fn, unit_interval(), 400, 4, 1.0, rng);
  CHECK(lo.p_hat == doctest::Approx(0.0));
  Rng rng2(3);
  auto hi = cross_entropy_search(fn, unit_interval(), 400, 4, 10.0, rng2);
  // all indicators fire; the importance-weighted mean estimates 1 with
  // finite-sample proposal noise
  CHECK(hi.p_hat > 0.5);
  CHECK(hi.p_hat < 2.0);
}

TEST_CASE("ams level thresholds strictly decrease") {
  Rng rng(11);
  auto est = ams(normal_quantile_fn(), unit_interval(), 200, 0.1, -3.0, rng);
  std::vector<double> levels;
  for (const auto& l : est.diagnostics.at("levels"))
    levels.push_back(l.at("level").get<double>());
  REQUIRE(levels.size() >= 2);
  for (std::size_t i = 1; i < levels.size(); ++i) CHECK(levels[i] < levels[i - 1]);
  CHECK(est.p_hat > 0.0);
  CHECK(est.p_hat <= 1.0);
}

TEST_CASE("ams single level when tau above all values") {
  Rng rng(13);
  auto est = ams(identity_fn(), unit_interval(), 100, 0.1, 2.0, rng);
  CHECK(est.p_hat == doctest::Approx(1.0));
}

TEST_CASE("ams degenerate population faults") {
  Rng rng(17);
  auto fn = [](const std::vector<double>&) { return EvalResult{1.0, false}; };
  CHECK_THROWS(ams(fn, unit_interval(), 50, 0.1, 0.0, rng));
}

TEST_CASE("gp interpolation and prior reversion") {
  Eigen::MatrixXd x(5, 1);
  x << 0.1, 0.3, 0.5, 0.7, 0.9;
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y(i) = std::sin(6.0 * x(i, 0));
  Rng rng(1);
  auto gp = gp_fit(x, y, rng);
  for (int i = 0; i < 5; ++i) {
    auto [mu, var] = gp_predict(gp, x.row(i).transpose());
    CHECK(mu == doctest::Approx(y(i)).epsilon(0.05));
    CHECK(var >= 0.0);
  }
  // far from all data the prediction reverts toward the prior mean and the
  // variance grows toward the signal level
  Eigen::VectorXd far(1);
  far << 50.0;
  auto [mu_far, var_far] = gp_predict(gp, far);
  CHECK(mu_far == doctest::Approx(y.mean()).epsilon(0.05));
  auto [mu0, var0] = gp_predict(gp, x.row(2).transpose());
  CHECK(var_far > var0);
}

TEST_CASE("gp sin benchmark") {
  // 10 points on [0, 2*pi], inputs mapped to the unit interval
  Eigen::MatrixXd x(10, 1);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i / 9.0;
    y(i) = std::sin(2.0 * M_PI * x(i, 0));
  }
  Rng rng(2);
  auto gp = gp_fit(x, y, rng);
  double max_err = 0.0;
  for (int i = 0; i <= 200; ++i) {
    Eigen::VectorXd q(1);
    q << i / 200.0;
    auto [mu, var] = gp_predict(gp, q);
    max_err = std::max(max_err, std::abs(mu - std::sin(2.0 * M_PI * q(0))));
  }
  CHECK(max_err < 0.1);
}

TEST_CASE("gp requires at least two samples") {
  Eigen::MatrixXd x(1, 1);
  x << 0.5;
  Eigen::VectorXd y(1);
  y << 1.0;
  Rng rng(3);
  CHECK_THROWS(gp_fit(x, y, rng));
}

TEST_CASE("expected improvement closed forms") {
  // mu = F* - 1, sigma = 1: EI = 1*Phi(1) + phi(1)
  double expected = norm_cdf(1.0) + norm_pdf(1.0);
  CHECK(expected_improvement(0.0, 1.0, 1.0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected_improvement(0.0, 1.0, 1.0) == doctest::Approx(1.0833).epsilon(1e-4));
  // sigma = 0 at the incumbent: no improvement possible
  CHECK(expected_improvement(1.0, 0.0, 1.0) == doctest::Approx(0.0));
  // sigma = 0 below the incumbent: improvement is deterministic
  CHECK(expected_improvement(0.2, 0.0, 1.0) == doctest::Approx(0.8));
  // EI nonnegative for a spread of inputs
  for (double mu : {-2.0, 0.0, 2.0}) {
    for (double s : {0.0, 0.5, 2.0}) {
      CHECK(expected_improvement(mu, s, 0.0) >= 0.0);
    }
  }
}

TEST_CASE("bayes opt finds the global minimum of a 2-D multimodal function") {
  // Himmelblau-like bumpy bowl on [0,1]^2; global minimum via dense grid
  auto fn = [](const std::vector<double>& x) {
    double a = x[0] * 4.0 - 2.0, b = x[1] * 4.0 - 2.0;
    double v = std::sin(3.0 * a) * std::cos(3.0 * b) + 0.3 * (a * a + b * b);
    return EvalResult{v, false};
  };
  SearchSpace space{{0.0, 0.0}, {1.0, 1.0}};

  double grid_min = 1e9;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      grid_min = std::min(grid_min, fn({i / 200.0, j / 200.0}).objective);
    }
  }

  int hits = 0;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    Rng rng(seed);
    BoOptions opts;
    opts.candidates = 1024;
    auto est = bayes_opt(fn, space, 100, 16, grid_min + 0.25, rng, opts);
    double best = 1e9;
    for (const auto& s : est.samples) best = std::min(best, s.objective);
    if (best < grid_min + 0.5) ++hits;
  }
  CHECK(hits >= 4);
}

TEST_CASE("verify dispatch determinism and jsonl output") {
  sim::SimConfig cfg;
  auto space = default_scenario_space();
  auto policy = sim::idm_policy(cfg);
  auto a = run_verification(Algorithm::MonteCarlo, policy, space, 128, 2.0, 7, cfg);
  auto b = run_verification(Algorithm::MonteCarlo, policy, space, 128, 2.0, 7, cfg);
  CHECK(a.p_hat == b.p_hat);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].objective == b.samples[i].objective);
  }

  std::ostringstream os;
  write_samples_jsonl(os, a, 2);
  std::istringstream is(os.str());
  std::string line;
  std::size_t n_lines = 0;
  bool saw_summary = false;
  while (std::getline(is, line)) {
    auto j = nlohmann::json::parse(line);
    if (j.value("summary", false)) {
      saw_summary = true;
      CHECK(j.contains("p_hat"));
      CHECK(j.at("tau").get<double>() == doctest::Approx(2.0));
    } else {
      CHECK(j.at("gen").get<int>() == 2);
      CHECK(j.at("params").size() == 4);
      CHECK(j.contains("objective"));
      CHECK(j.contains("collided"));
      ++n_lines;
    }
  }
  CHECK(saw_summary);
  CHECK(n_lines == a.samples.size());
}

TEST_CASE("algorithm name round trip") {
  for (const char* name : {"gs", "mc", "ce", "bo", "ams"}) {
    CHECK(to_string(algorithm_from_string(name)) == name);
  }
  CHECK_THROWS(algorithm_from_string("nope"));
}

TEST_CASE("batch eval serial/parallel identical") {
  Rng rng(21);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({rng.uniform()});
  auto fn = normal_quantile_fn();
  auto s = batch_eval_serial(fn, pts);
  auto p = batch_eval(fn, pts);
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].objective == p[i].objective);
}
