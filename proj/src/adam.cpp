#include "subnet/adam.hpp"

#include <cmath>

#include "subnet/errors.hpp"

namespace subnet {

AdamState adam_init(Eigen::Index n_params, double lr) {
  if (n_params < 1) fail(ErrorCode::InvalidArgument, "adam: empty parameter vector");
  if (lr < 0) fail(ErrorCode::InvalidArgument, "adam: negative learning rate");
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(n_params);
  s.second_moment = Eigen::VectorXd::Zero(n_params);
  s.lr = lr;
  return s;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state) {
  if (params.size() != state.first_moment.size() ||
      grad.size() != state.first_moment.size())
    fail(ErrorCode::Dimension, "adam: parameter/gradient size mismatch");
  ++state.step_count;
  state.first_moment = state.beta1 * state.first_moment + (1 - state.beta1) * grad;
  state.second_moment = state.beta2 * state.second_moment +
                        (1 - state.beta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double c2 = 1.0 - std::pow(state.beta2, state.step_count);
  params.array() -=
      state.lr * (state.first_moment.array() / c1) /
      ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

}  // namespace subnet
