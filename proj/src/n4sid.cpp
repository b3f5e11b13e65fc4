#include "subnet/n4sid.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <iostream>
#include <string>

#include "subnet/errors.hpp"

namespace subnet {

namespace {

// Block-Hankel with `blocks` block rows: column t stacks
// sig.col(first+t) ... sig.col(first+t+blocks-1).
Eigen::MatrixXd hankel(const Eigen::MatrixXd& sig, Eigen::Index first,
                       Eigen::Index blocks, Eigen::Index j) {
  const Eigen::Index ch = sig.rows();
  Eigen::MatrixXd H(blocks * ch, j);
  for (Eigen::Index r = 0; r < blocks; ++r)
    H.middleRows(r * ch, ch) = sig.middleCols(first + r, j);
  return H;
}

}  // namespace

LinearSS n4sid_estimate(const Dataset& ds, Eigen::Index n_x,
                        const N4sidOptions& opts) {
  ds.validate();
  if (n_x < 1) fail(ErrorCode::InvalidArgument, "n4sid: n_x must be >= 1");
  const Eigen::Index n_u = ds.n_u(), n_y = ds.n_y(), N = ds.n_samples();
  const Eigen::Index i = opts.horizon > 0 ? opts.horizon : 4 * n_x;
  if (i <= n_x)
    fail(ErrorCode::InvalidArgument, "n4sid: horizon must exceed n_x");
  if (N < 10 * i * std::max(n_u, n_y))
    fail(ErrorCode::InvalidArgument,
         "n4sid: record too short: need N >= 10*horizon*max(n_u,n_y) = " +
             std::to_string(10 * i * std::max(n_u, n_y)) + ", have " +
             std::to_string(N));

  const Eigen::Index j = N - 2 * i + 1;
  const Eigen::Index n1 = i * n_u;            // future inputs
  const Eigen::Index n2 = i * (n_u + n_y);    // past inputs and outputs
  const Eigen::Index n3 = i * n_y;            // future outputs
  const Eigen::Index m = n1 + n2 + n3;
  if (j < m)
    fail(ErrorCode::InvalidArgument, "n4sid: record too short for horizon");

  // Stacked data matrix [U_f; U_p; Y_p; Y_f], compressed by LQ: only the
  // m x m lower-triangular factor is kept, so nothing of size j x j exists.
  Eigen::MatrixXd D(m, j);
  D.topRows(n1) = hankel(ds.u, i, i, j);
  D.middleRows(n1, i * n_u) = hankel(ds.u, 0, i, j);
  D.middleRows(n1 + i * n_u, i * n_y) = hankel(ds.y, 0, i, j);
  D.bottomRows(n3) = hankel(ds.y, i, i, j);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(D.transpose());
  Eigen::MatrixXd L = qr.matrixQR()
                          .topRows(m)
                          .triangularView<Eigen::Upper>()
                          .transpose();

  const auto L21 = L.block(n1, 0, n2, n1);
  const auto L22 = L.block(n1, n1, n2, n2);
  const auto L31 = L.block(n1 + n2, 0, n3, n1);
  const auto L32 = L.block(n1 + n2, n1, n3, n2);
  (void)L31;

  // Oblique projection of the future outputs onto the past data along the
  // future inputs, expressed in the orthonormal row basis from the LQ step:
  // O = [X L21, X L22] with X = L32 L22^+. Its SVD equals the projection's.
  Eigen::MatrixXd X = L32 * pinv_svd(L22, 1e-10);
  Eigen::MatrixXd M_proj(n3, n1 + n2);
  M_proj.leftCols(n1).noalias() = X * L21;
  M_proj.rightCols(n2).noalias() = X * L22;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M_proj, Eigen::ComputeThinU);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0) || !std::isfinite(s(0)))
    fail(ErrorCode::Identifiability,
         "n4sid: projection of future outputs onto past data is zero; "
         "data carry no identifiable dynamics");
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > opts.rank_rel_tol * s(0)) ++rank;
  if (n_x > rank)
    fail(ErrorCode::Order,
         "n4sid: requested order " + std::to_string(n_x) +
             " exceeds the detected rank " + std::to_string(rank) +
             " of the data");

  // Extended observability matrix (up to state basis); C is its top block,
  // A solves the shift equation between its upper and lower parts.
  Eigen::MatrixXd Gamma =
      svd.matrixU().leftCols(n_x) *
      s.head(n_x).array().sqrt().matrix().asDiagonal();
  LinearSS ss;
  ss.C = Gamma.topRows(n_y);
  const Eigen::MatrixXd G_up = Gamma.topRows((i - 1) * n_y);
  const Eigen::MatrixXd G_dn = Gamma.bottomRows((i - 1) * n_y);
  ss.A = G_up.colPivHouseholderQr().solve(G_dn);

  // On noisy or strongly nonlinear records the shift equation can place
  // eigenvalues outside the unit circle even though the underlying best
  // linear approximation is stable; every downstream consumer (free-run
  // NRMS, encoder maps, warm starts) needs a stable estimate.
  if (spectral_radius(ss.A) >= 1.0) {
    std::cerr << "warning: n4sid: estimated A is unstable; reflecting "
                 "eigenvalues into the unit disk\n";
    ss.A = stabilize_discrete(ss.A);
  }

  // Output-equation least squares for B (feed-through fixed at zero):
  //   y_t = C A^t x0 + C L_t vec(B),  L_{t+1} = A L_t + (u_t^T kron I).
  // x0 is estimated jointly and discarded.
  const Eigen::Index d = n_x * (1 + n_u);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd At = Eigen::MatrixXd::Identity(n_x, n_x);
  Eigen::MatrixXd Lt = Eigen::MatrixXd::Zero(n_x, n_x * n_u);
  Eigen::MatrixXd phi(n_y, d);
  for (Eigen::Index t = 0; t < N; ++t) {
    phi.leftCols(n_x).noalias() = ss.C * At;
    phi.rightCols(n_x * n_u).noalias() = ss.C * Lt;
    G.noalias() += phi.transpose() * phi;
    rhs.noalias() += phi.transpose() * ds.y.col(t);
    // Advance the regressors to t+1.
    Lt = ss.A * Lt;
    for (Eigen::Index c = 0; c < n_u; ++c)
      Lt.middleCols(c * n_x, n_x).diagonal().array() += ds.u(c, t);
    At = ss.A * At;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    fail(ErrorCode::Identifiability, "n4sid: B regression is degenerate");
  Eigen::VectorXd z = ldlt.solve(rhs);
  if (!z.allFinite())
    fail(ErrorCode::Identifiability, "n4sid: B regression produced non-finite values");
  ss.B.resize(n_x, n_u);
  for (Eigen::Index c = 0; c < n_u; ++c)
    ss.B.col(c) = z.segment(n_x + c * n_x, n_x);
  ss.validate();
  return ss;
}

}  // namespace subnet
