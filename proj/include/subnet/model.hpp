#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subnet/dataset.hpp"
#include "subnet/linear_ss.hpp"
#include "subnet/mlp.hpp"

namespace subnet {

// Nonlinear state-space model with a linear skeleton and additive nets:
//   x_{t+1} = A x_t + B u_t + f_net([x_t; u_t])
//   y_t     = C x_t + h_net(x_t)
// plus a state encoder that maps the previous n_a outputs / n_b inputs to an
// initial state:
//   x_t = W_u u_past + W_y y_past + psi_net([y_past; u_past])
//
// Window layout matches ReconMaps: y_past oldest-first, u_past newest-first.
struct SubnetModel {
  Eigen::Index n_x = 0, n_u = 0, n_y = 0;
  Eigen::Index n_a = 0, n_b = 0;

  Eigen::MatrixXd A, B, C;
  Eigen::MatrixXd W_u;  // n_x x (n_b*n_u)
  Eigen::MatrixXd W_y;  // n_x x (n_a*n_y)
  Mlp f_net;            // (n_x+n_u) -> n_x
  Mlp h_net;            // n_x -> n_y
  Mlp psi_net;          // (n_a*n_y + n_b*n_u) -> n_x

  // Scaling fit on the training data; carried so a serialized model can be
  // applied to raw records.
  std::optional<Normalizer> normalizer;

  Eigen::Index lag() const { return std::max(n_a, n_b); }
  void validate() const;
};

// Fresh model with every matrix and every net weight uniform in
// [-1/sqrt(fan_in), 1/sqrt(fan_in)] (fan_in = input width of that matrix)
// and all biases zero. Draw order: A, B, C, W_u, W_y, f_net, h_net, psi_net.
SubnetModel subnet_new(Eigen::Index n_x, Eigen::Index n_u, Eigen::Index n_y,
                       Eigen::Index n_a, Eigen::Index n_b,
                       const std::vector<Eigen::Index>& hidden_dims,
                       std::uint64_t seed);

enum class InitScheme { RanDyRanEnc, LinDyRanEnc, LinDyLinEnc };

const char* scheme_name(InitScheme s);              // e.g. "LinDY+LinENC"
InitScheme parse_scheme(const std::string& name);   // fails with Config

// Overwrites parts of a randomly initialized model with the linear estimate:
//   RanDY+RanENC: nothing (returns the model unchanged)
//   LinDY+RanENC: A,B,C from the BLA; last layer of f_net and h_net zeroed
//   LinDY+LinENC: additionally W_u = ca_pinv*cab_map, W_y = ca_pinv, and the
//                 last layer of psi_net zeroed
// bla is required for the Lin* schemes, maps for LinDY+LinENC; maps.n must
// equal n_a and n_b (LagMismatch otherwise), dimensions must agree.
SubnetModel apply_init_scheme(SubnetModel model, InitScheme scheme,
                              const LinearSS* bla, const ReconMaps* maps);

// u_past newest-first (n_b*n_u), y_past oldest-first (n_a*n_y).
Eigen::VectorXd encode(const SubnetModel& m, const Eigen::VectorXd& u_past,
                       const Eigen::VectorXd& y_past);

// T-step open-loop rollout from x0 under u_seg (n_u x T); returns n_y x T.
// Fails with Divergence (reporting the step) on non-finite values.
Eigen::MatrixXd rollout(const SubnetModel& m, const Eigen::VectorXd& x0,
                        const Eigen::MatrixXd& u_seg);

// Window gather helpers; t is the index being encoded, so the windows end
// at sample t-1.
Eigen::VectorXd stack_u_window(const Eigen::MatrixXd& u, Eigen::Index t,
                               Eigen::Index n_b);
Eigen::VectorXd stack_y_window(const Eigen::MatrixXd& y, Eigen::Index t,
                               Eigen::Index n_a);

// Flat parameter vector: A, B, C, W_u, W_y (row-major each), then f_net,
// h_net, psi_net (per-net layout in mlp.hpp). Gradients use the same order.
Eigen::Index param_count(const SubnetModel& m);
Eigen::VectorXd flatten_params(const SubnetModel& m);
void set_params(SubnetModel& m, const Eigen::VectorXd& theta);

// JSON (row-major matrices; embeds the normalizer when present).
void save_model(const SubnetModel& m, const std::string& path);
SubnetModel load_model(const std::string& path);

}  // namespace subnet
