#include "accsi/trainer/advantage.hpp"

#include <cmath>
#include <stdexcept>

namespace accsi::trainer {

std::pair<std::vector<double>, std::vector<double>> compute_advantages(
    const std::vector<Transition>& transitions, double gamma, double lambda,
    double bootstrap_value) {
  const std::size_t n = transitions.size();
  if (n == 0) throw std::invalid_argument("compute_advantages: empty batch");
  for (const auto& t : transitions) {
    if (!std::isfinite(t.reward) || !std::isfinite(t.value)) {
      throw std::invalid_argument("compute_advantages: non-finite transition");
    }
  }

  std::vector<double> adv(n), ret(n);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    const auto& t = transitions[k];
    const double nonterminal = t.done ? 0.0 : 1.0;
    const double delta = t.reward + gamma * next_value * nonterminal - t.value;
    adv[k] = delta + gamma * lambda * nonterminal * next_adv;
    ret[k] = adv[k] + t.value;
    next_adv = adv[k];
    next_value = t.value;
  }
  return {std::move(adv), std::move(ret)};
}

}  // namespace accsi::trainer
