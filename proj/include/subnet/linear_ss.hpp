#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace subnet {

// Discrete-time linear state-space model without feed-through:
//   x_{t+1} = A x_t + B u_t
//   y_t     = C x_t
struct LinearSS {
  Eigen::MatrixXd A;  // n_x x n_x
  Eigen::MatrixXd B;  // n_x x n_u
  Eigen::MatrixXd C;  // n_y x n_x

  Eigen::Index n_x() const { return A.rows(); }
  Eigen::Index n_u() const { return B.cols(); }
  Eigen::Index n_y() const { return C.rows(); }

  void validate() const;
};

// Simulates over the full input horizon; y.col(t) corresponds to u.col(t).
Eigen::MatrixXd simulate_lss(const LinearSS& ss, const Eigen::MatrixXd& u,
                             const Eigen::VectorXd& x0);

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& A);
double spectral_radius(const Eigen::MatrixXd& A);

// Reflects eigenvalues with |lambda| >= 1 to radius margin^2/|lambda| (angle
// kept), leaving the stable part of the spectrum in place. Returns A itself,
// bitwise, when every eigenvalue is already inside the unit circle. Falls
// back to uniform scaling by margin/rho(A) if the eigenbasis is too ill
// conditioned to reconstruct through.
Eigen::MatrixXd stabilize_discrete(const Eigen::MatrixXd& A,
                                   double margin = 0.999);

// Moore-Penrose pseudo-inverse via SVD; singular values below
// rel_tol * sigma_max are treated as zero. rank_out reports the numeric rank.
Eigen::MatrixXd pinv_svd(const Eigen::MatrixXd& M, double rel_tol = 1e-10,
                         Eigen::Index* rank_out = nullptr);

// Maps that express the current state through the previous n samples of a
// noiseless record:
//
//   y_past = ca_map * x_t - cab_map * u_past            (time-inverted model)
//   x_t    = ca_pinv * (y_past + cab_map * u_past)
//
// Window layout (used consistently by the encoder and the training code):
//   y_past = [y_{t-n}; ...; y_{t-1}]   oldest sample first
//   u_past = [u_{t-1}; ...; u_{t-n}]   newest sample first
//
// The input window runs newest-first because cab_map's block anti-triangular
// pattern (zero lower-right blocks) pairs block column j with u_{t-1-j}; with
// an oldest-first input window the identity above does not hold.
//
// ca_map block row k (k = 0..n-1, top to bottom) is C*A^{-(n-k)}, so the top
// row pairs with the oldest output. cab_map block (i, j) is
// C*A^{-(n-i-j)}*B when n-i-j >= 1 and exactly zero otherwise.
struct ReconMaps {
  Eigen::MatrixXd ca_map;   // (n*n_y) x n_x
  Eigen::MatrixXd cab_map;  // (n*n_y) x (n*n_u)
  Eigen::MatrixXd ca_pinv;  // n_x x (n*n_y)
  Eigen::Index n = 0;       // window length
};

// Requires invertible A (condition < 1e12; negative powers are computed by
// repeated linear solves) and rank(ca_map) = n_x.
ReconMaps build_recon_maps(const LinearSS& ss, Eigen::Index n);

// Exact on noiseless data from the same system; least-squares otherwise.
// Window layout as documented on ReconMaps.
Eigen::VectorXd reconstruct_state(const ReconMaps& maps,
                                  const Eigen::VectorXd& y_past,
                                  const Eigen::VectorXd& u_past);

// JSON (row-major matrices, explicit order field).
void save_linear_ss(const LinearSS& ss, const std::string& path);
LinearSS load_linear_ss(const std::string& path);

}  // namespace subnet
