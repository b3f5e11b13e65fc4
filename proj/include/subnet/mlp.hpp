#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "subnet/rng.hpp"

namespace subnet {

struct DenseLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

// Fully connected net: tanh hidden layers followed by one linear output
// layer kept separate (last_weight/last_bias) because the init schemes zero
// it independently of the hidden stack.
struct Mlp {
  std::vector<DenseLayer> hidden;
  Eigen::MatrixXd last_weight;
  Eigen::VectorXd last_bias;

  Eigen::Index in_dim() const {
    return hidden.empty() ? last_weight.cols() : hidden.front().W.cols();
  }
  Eigen::Index out_dim() const { return last_weight.rows(); }
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, all biases
// zero. Draw order: layers first-to-last, each matrix row-major.
Mlp mlp_init(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden_dims,
             Eigen::Index out_dim, Rng& rng);
Mlp mlp_init(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden_dims,
             Eigen::Index out_dim, std::uint64_t seed);

// Batched forward; columns are independent samples.
Eigen::MatrixXd mlp_forward(const Mlp& m, const Eigen::MatrixXd& X);
Eigen::VectorXd mlp_forward(const Mlp& m, const Eigen::VectorXd& x);

// Activations cached for the backward pass: act[0] is the input batch,
// act[i] the output of hidden layer i-1.
struct MlpCache {
  std::vector<Eigen::MatrixXd> act;
};

Eigen::MatrixXd mlp_forward_cached(const Mlp& m, const Eigen::MatrixXd& X,
                                   MlpCache& cache);

Mlp mlp_zeros_like(const Mlp& m);

// Reverse-mode step for the cached forward: accumulates parameter gradients
// into grad (same shapes as m) and returns the gradient w.r.t. the input
// batch. dY is the loss gradient at the output.
Eigen::MatrixXd mlp_backward(const Mlp& m, const MlpCache& cache,
                             const Eigen::MatrixXd& dY, Mlp& grad);

// Mean-squared-error head used by tests and small fits:
//   L = mean over (samples, output dims) of (m(x) - y)^2.
double mlp_mse(const Mlp& m, const Eigen::MatrixXd& X,
               const Eigen::MatrixXd& Y);
// Returns the loss and fills grad with dL/dparams. Fails with Numeric if a
// non-finite value appears, identifying the layer that produced it.
double mlp_mse_gradient(const Mlp& m, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& Y, Mlp& grad);

// Flat parameter vector contract: hidden layers in order (W row-major, then
// b), then last_weight row-major, then last_bias.
Eigen::Index mlp_param_count(const Mlp& m);
void mlp_pack(const Mlp& m, double* dst);
void mlp_unpack(Mlp& m, const double* src);

}  // namespace subnet
