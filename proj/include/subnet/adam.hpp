#pragma once

#include <Eigen/Dense>

namespace subnet {

// Adam with bias correction. Update per coordinate:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState adam_init(Eigen::Index n_params, double lr);

// One in-place update. Gradient length must match the state.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state);

}  // namespace subnet
