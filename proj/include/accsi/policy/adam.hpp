#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace accsi::policy {

// First-order adaptive-moment optimizer with bias correction, over a flat
// parameter vector.
class Adam {
 public:
  Adam(int n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
      throw std::invalid_argument("Adam::step: shape mismatch");
    }
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    params -= (lr_ / bc1) * m_.cwiseQuotient(
                  ((v_ / bc2).cwiseSqrt().array() + eps_).matrix());
  }

  int steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace accsi::policy
