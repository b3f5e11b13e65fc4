#include "subnet/loss.hpp"

#include <string>
#include <vector>

#include "subnet/errors.hpp"

namespace subnet {

std::vector<Eigen::Index> valid_starts(Eigen::Index n_samples, Eigen::Index T,
                                       Eigen::Index n_a, Eigen::Index n_b) {
  if (T < 1) fail(ErrorCode::InvalidArgument, "valid_starts: T must be >= 1");
  const Eigen::Index lag = std::max(n_a, n_b);
  std::vector<Eigen::Index> out;
  for (Eigen::Index s = lag; s + T <= n_samples; ++s) out.push_back(s);
  return out;
}

namespace {

struct BatchInputs {
  Eigen::MatrixXd Ypast, Upast, Z;          // encoder inputs
  std::vector<Eigen::MatrixXd> U, Ytgt;     // per-step gathers
};

// Gathers the window and section data for all starts as column batches.
BatchInputs gather(const SubnetModel& m, const Dataset& ds,
                   const std::vector<Eigen::Index>& starts, Eigen::Index T) {
  m.validate();
  ds.validate();
  if (starts.empty())
    fail(ErrorCode::InvalidArgument, "batch loss: empty start list");
  if (T < 1) fail(ErrorCode::InvalidArgument, "batch loss: T must be >= 1");
  if (ds.n_u() != m.n_u || ds.n_y() != m.n_y)
    fail(ErrorCode::Dimension, "batch loss: dataset channels do not match model");
  const Eigen::Index N = ds.n_samples(), lag = m.lag();
  const Eigen::Index S = static_cast<Eigen::Index>(starts.size());

  BatchInputs in;
  in.Ypast.resize(m.n_a * m.n_y, S);
  in.Upast.resize(m.n_b * m.n_u, S);
  for (Eigen::Index j = 0; j < S; ++j) {
    const Eigen::Index s = starts[static_cast<std::size_t>(j)];
    if (s < lag || s + T > N)
      fail(ErrorCode::InvalidArgument,
           "batch loss: start " + std::to_string(s) + " outside valid range [" +
               std::to_string(lag) + ", " + std::to_string(N - T) + "]");
    in.Ypast.col(j) = stack_y_window(ds.y, s, m.n_a);
    in.Upast.col(j) = stack_u_window(ds.u, s, m.n_b);
  }
  in.Z.resize(in.Ypast.rows() + in.Upast.rows(), S);
  in.Z << in.Ypast, in.Upast;

  in.U.resize(static_cast<std::size_t>(T));
  in.Ytgt.resize(static_cast<std::size_t>(T));
  for (Eigen::Index k = 0; k < T; ++k) {
    Eigen::MatrixXd Uk(m.n_u, S), Yk(m.n_y, S);
    for (Eigen::Index j = 0; j < S; ++j) {
      const Eigen::Index t = starts[static_cast<std::size_t>(j)] + k;
      Uk.col(j) = ds.u.col(t);
      Yk.col(j) = ds.y.col(t);
    }
    in.U[static_cast<std::size_t>(k)] = std::move(Uk);
    in.Ytgt[static_cast<std::size_t>(k)] = std::move(Yk);
  }
  return in;
}

}  // namespace

double batch_loss(const SubnetModel& m, const Dataset& ds,
                  const std::vector<Eigen::Index>& starts, Eigen::Index T) {
  const BatchInputs in = gather(m, ds, starts, T);
  const Eigen::Index S = in.Ypast.cols();

  Eigen::MatrixXd X = m.W_u * in.Upast + m.W_y * in.Ypast +
                      mlp_forward(m.psi_net, in.Z);
  Eigen::MatrixXd XU(m.n_x + m.n_u, S);
  double sq_sum = 0.0;
  for (Eigen::Index k = 0; k < T; ++k) {
    const auto& Uk = in.U[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd E =
        m.C * X + mlp_forward(m.h_net, X) - in.Ytgt[static_cast<std::size_t>(k)];
    sq_sum += E.squaredNorm();
    XU << X, Uk;
    X = m.A * X + m.B * Uk + mlp_forward(m.f_net, XU);
  }
  return sq_sum / static_cast<double>(S * T);
}

double batch_loss_gradient(const SubnetModel& m, const Dataset& ds,
                           const std::vector<Eigen::Index>& starts,
                           Eigen::Index T, Eigen::VectorXd& grad) {
  const BatchInputs in = gather(m, ds, starts, T);
  const Eigen::Index S = in.Ypast.cols();

  // Forward pass, keeping every activation needed by the reverse sweep.
  MlpCache psi_cache;
  std::vector<Eigen::MatrixXd> X(static_cast<std::size_t>(T));
  std::vector<Eigen::MatrixXd> E(static_cast<std::size_t>(T));
  std::vector<MlpCache> f_cache(static_cast<std::size_t>(T - 1));
  std::vector<MlpCache> h_cache(static_cast<std::size_t>(T));

  X[0] = m.W_u * in.Upast + m.W_y * in.Ypast +
         mlp_forward_cached(m.psi_net, in.Z, psi_cache);
  double sq_sum = 0.0;
  for (Eigen::Index k = 0; k < T; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    E[ku] = m.C * X[ku] + mlp_forward_cached(m.h_net, X[ku], h_cache[ku]) -
            in.Ytgt[ku];
    sq_sum += E[ku].squaredNorm();
    if (k + 1 < T) {
      Eigen::MatrixXd XU(m.n_x + m.n_u, S);
      XU << X[ku], in.U[ku];
      X[ku + 1] = m.A * X[ku] + m.B * in.U[ku] +
                  mlp_forward_cached(m.f_net, XU, f_cache[ku]);
    }
  }
  const double scale = 2.0 / static_cast<double>(S * T);

  // Reverse sweep through the unrolled graph. dXnext holds dL/dX_{k+1}
  // while step k is processed; the final state X_T is never produced, so the
  // last state equation is not part of the graph.
  SubnetModel g = m;
  g.A.setZero(); g.B.setZero(); g.C.setZero();
  g.W_u.setZero(); g.W_y.setZero();
  g.f_net = mlp_zeros_like(m.f_net);
  g.h_net = mlp_zeros_like(m.h_net);
  g.psi_net = mlp_zeros_like(m.psi_net);

  Eigen::MatrixXd dXnext;  // empty means zero
  for (Eigen::Index k = T - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    Eigen::MatrixXd dX;
    if (dXnext.size()) {
      g.A.noalias() += dXnext * X[ku].transpose();
      g.B.noalias() += dXnext * in.U[ku].transpose();
      const Eigen::MatrixXd dXU = mlp_backward(m.f_net, f_cache[ku], dXnext, g.f_net);
      dX = m.A.transpose() * dXnext + dXU.topRows(m.n_x);
    } else {
      dX = Eigen::MatrixXd::Zero(m.n_x, S);
    }
    const Eigen::MatrixXd dY = scale * E[ku];
    g.C.noalias() += dY * X[ku].transpose();
    dX += m.C.transpose() * dY + mlp_backward(m.h_net, h_cache[ku], dY, g.h_net);
    dXnext = std::move(dX);
  }
  // Encoder backward: dXnext is now dL/dX_0.
  g.W_u.noalias() += dXnext * in.Upast.transpose();
  g.W_y.noalias() += dXnext * in.Ypast.transpose();
  mlp_backward(m.psi_net, psi_cache, dXnext, g.psi_net);

  grad = flatten_params(g);
  return sq_sum / static_cast<double>(S * T);
}

}  // namespace subnet
