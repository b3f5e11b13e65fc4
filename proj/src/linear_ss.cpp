#include "subnet/linear_ss.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <string>

#include "io_util.hpp"
#include "subnet/errors.hpp"

namespace subnet {

void LinearSS::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols())
    fail(ErrorCode::Dimension, "A must be square and non-empty");
  if (B.rows() != A.rows() || B.cols() < 1)
    fail(ErrorCode::Dimension, "B must be n_x x n_u");
  if (C.cols() != A.rows() || C.rows() < 1)
    fail(ErrorCode::Dimension, "C must be n_y x n_x");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite())
    fail(ErrorCode::InvalidArgument, "linear model has non-finite entries");
}

Eigen::MatrixXd simulate_lss(const LinearSS& ss, const Eigen::MatrixXd& u,
                             const Eigen::VectorXd& x0) {
  ss.validate();
  if (u.rows() != ss.n_u())
    fail(ErrorCode::Dimension, "simulate_lss: input channel mismatch");
  if (x0.size() != ss.n_x())
    fail(ErrorCode::Dimension, "simulate_lss: x0 size mismatch");
  const Eigen::Index N = u.cols();
  Eigen::MatrixXd y(ss.n_y(), N);
  Eigen::VectorXd x = x0;
  for (Eigen::Index t = 0; t < N; ++t) {
    y.col(t).noalias() = ss.C * x;
    x = ss.A * x + ss.B * u.col(t);
  }
  return y;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> out(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) out[i] = es.eigenvalues()(i);
  return out;
}

double spectral_radius(const Eigen::MatrixXd& A) {
  double r = 0.0;
  for (const auto& ev : eigenvalues(A)) r = std::max(r, std::abs(ev));
  return r;
}

Eigen::MatrixXd stabilize_discrete(const Eigen::MatrixXd& A, double margin) {
  if (A.rows() < 1 || A.rows() != A.cols())
    fail(ErrorCode::Dimension, "stabilize_discrete: A must be square");
  if (!(margin > 0.0 && margin < 1.0))
    fail(ErrorCode::InvalidArgument,
         "stabilize_discrete: margin must be in (0, 1)");
  if (!A.allFinite())
    fail(ErrorCode::InvalidArgument,
         "stabilize_discrete: A has non-finite entries");

  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) return A * (margin / A.norm());

  Eigen::VectorXcd lam = es.eigenvalues();
  bool any = false;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam(i)) >= 1.0) any = true;
  if (!any) return A;

  // Reflection keeps the angle and maps radius r >= 1 to margin^2/r < 1.
  // The scale factor is real, so conjugate pairs stay conjugate and the
  // reconstruction below is real up to rounding.
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double r = std::abs(lam(i));
    if (r >= 1.0) lam(i) *= (margin * margin) / (r * r);
  }

  const Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(V);
  if (lu.isInvertible()) {
    Eigen::MatrixXd out =
        (V * lam.asDiagonal() * lu.inverse()).real();
    if (out.allFinite() && spectral_radius(out) < 1.0) return out;
  }
  // Defective or numerically unreliable eigenbasis: shrink uniformly.
  return A * (margin / spectral_radius(A));
}

Eigen::MatrixXd pinv_svd(const Eigen::MatrixXd& M, double rel_tol,
                         Eigen::Index* rank_out) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() ? rel_tol * s(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
      ++rank;
    }
  if (rank_out) *rank_out = rank;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

ReconMaps build_recon_maps(const LinearSS& ss, Eigen::Index n) {
  ss.validate();
  if (n < 1) fail(ErrorCode::InvalidArgument, "recon maps: window n must be >= 1");

  // Invertibility gate on A: condition number below 1e12.
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ss.A);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) <= 0.0 || s(0) / s(s.size() - 1) > 1e12)
      fail(ErrorCode::Invertibility,
           "recon maps: A is singular or too ill-conditioned to invert");
  }

  const Eigen::Index n_x = ss.n_x(), n_u = ss.n_u(), n_y = ss.n_y();
  // Z[k] = C * A^{-(k+1)}, built by repeated solves against A^T (never
  // forming A^{-1}).
  Eigen::PartialPivLU<Eigen::MatrixXd> luT(ss.A.transpose());
  std::vector<Eigen::MatrixXd> Z(static_cast<std::size_t>(n));
  Eigen::MatrixXd cur = ss.C;
  for (Eigen::Index k = 0; k < n; ++k) {
    cur = luT.solve(cur.transpose()).transpose();
    Z[static_cast<std::size_t>(k)] = cur;
  }

  ReconMaps maps;
  maps.n = n;
  maps.ca_map.resize(n * n_y, n_x);
  // Top block row pairs with the oldest output sample: C A^{-n} ... C A^{-1}.
  for (Eigen::Index i = 0; i < n; ++i)
    maps.ca_map.middleRows(i * n_y, n_y) = Z[static_cast<std::size_t>(n - 1 - i)];

  // Block anti-triangular input map; block (i, j) pairs output y_{t-n+i}
  // with input u_{t-1-j} (newest-first input window).
  maps.cab_map = Eigen::MatrixXd::Zero(n * n_y, n * n_u);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index p = n - i - j;  // power of A^{-1}
      if (p >= 1)
        maps.cab_map.block(i * n_y, j * n_u, n_y, n_u) =
            Z[static_cast<std::size_t>(p - 1)] * ss.B;
    }

  Eigen::Index rank = 0;
  maps.ca_pinv = pinv_svd(maps.ca_map, 1e-10, &rank);
  if (rank < n_x)
    fail(ErrorCode::Observability,
         "recon maps: ca_map rank " + std::to_string(rank) + " < n_x " +
             std::to_string(n_x) + "; system/window not observable");
  return maps;
}

Eigen::VectorXd reconstruct_state(const ReconMaps& maps,
                                  const Eigen::VectorXd& y_past,
                                  const Eigen::VectorXd& u_past) {
  if (y_past.size() != maps.ca_map.rows())
    fail(ErrorCode::Dimension, "reconstruct_state: y_past length mismatch");
  if (u_past.size() != maps.cab_map.cols())
    fail(ErrorCode::Dimension, "reconstruct_state: u_past length mismatch");
  return maps.ca_pinv * (y_past + maps.cab_map * u_past);
}

void save_linear_ss(const LinearSS& ss, const std::string& path) {
  ss.validate();
  nlohmann::json j;
  j["n_x"] = ss.n_x();
  j["A"] = detail::matrix_to_json(ss.A);
  j["B"] = detail::matrix_to_json(ss.B);
  j["C"] = detail::matrix_to_json(ss.C);
  detail::save_json_file(j, path);
}

LinearSS load_linear_ss(const std::string& path) {
  auto j = detail::load_json_file(path);
  LinearSS ss;
  ss.A = detail::matrix_from_json(detail::require_field(j, "A", path), path + ":A");
  ss.B = detail::matrix_from_json(detail::require_field(j, "B", path), path + ":B");
  ss.C = detail::matrix_from_json(detail::require_field(j, "C", path), path + ":C");
  ss.validate();
  if (j.contains("n_x") && j["n_x"].get<Eigen::Index>() != ss.n_x())
    fail(ErrorCode::Schema, path + ": n_x field disagrees with A");
  return ss;
}

}  // namespace subnet
