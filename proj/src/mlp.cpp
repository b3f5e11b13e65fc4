#include "subnet/mlp.hpp"

#include <cmath>
#include <string>

#include "subnet/errors.hpp"

namespace subnet {

namespace {

// Weight entries uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], drawn
// row-major so the stream layout is pinned.
Eigen::MatrixXd random_weight(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Eigen::MatrixXd W(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) W(i, j) = rng.uniform(-bound, bound);
  return W;
}

}  // namespace

Mlp mlp_init(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden_dims,
             Eigen::Index out_dim, Rng& rng) {
  if (in_dim < 1 || out_dim < 1)
    fail(ErrorCode::InvalidArgument, "mlp_init: dimensions must be positive");
  for (Eigen::Index h : hidden_dims)
    if (h < 1) fail(ErrorCode::InvalidArgument, "mlp_init: zero-width hidden layer");
  Mlp m;
  Eigen::Index prev = in_dim;
  for (Eigen::Index h : hidden_dims) {
    m.hidden.push_back({random_weight(h, prev, rng), Eigen::VectorXd::Zero(h)});
    prev = h;
  }
  m.last_weight = random_weight(out_dim, prev, rng);
  m.last_bias = Eigen::VectorXd::Zero(out_dim);
  return m;
}

Mlp mlp_init(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden_dims,
             Eigen::Index out_dim, std::uint64_t seed) {
  Rng rng(seed);
  return mlp_init(in_dim, hidden_dims, out_dim, rng);
}

Eigen::MatrixXd mlp_forward(const Mlp& m, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd a = X;
  for (const auto& layer : m.hidden)
    a = ((layer.W * a).colwise() + layer.b).array().tanh();
  return (m.last_weight * a).colwise() + m.last_bias;
}

Eigen::VectorXd mlp_forward(const Mlp& m, const Eigen::VectorXd& x) {
  return mlp_forward(m, Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd mlp_forward_cached(const Mlp& m, const Eigen::MatrixXd& X,
                                   MlpCache& cache) {
  cache.act.assign(1, X);
  for (const auto& layer : m.hidden)
    cache.act.push_back(
        ((layer.W * cache.act.back()).colwise() + layer.b).array().tanh());
  return (m.last_weight * cache.act.back()).colwise() + m.last_bias;
}

Mlp mlp_zeros_like(const Mlp& m) {
  Mlp z;
  for (const auto& layer : m.hidden)
    z.hidden.push_back({Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()),
                        Eigen::VectorXd::Zero(layer.b.size())});
  z.last_weight = Eigen::MatrixXd::Zero(m.last_weight.rows(), m.last_weight.cols());
  z.last_bias = Eigen::VectorXd::Zero(m.last_bias.size());
  return z;
}

Eigen::MatrixXd mlp_backward(const Mlp& m, const MlpCache& cache,
                             const Eigen::MatrixXd& dY, Mlp& grad) {
  // Output layer.
  grad.last_weight.noalias() += dY * cache.act.back().transpose();
  grad.last_bias.noalias() += dY.rowwise().sum();
  Eigen::MatrixXd da = m.last_weight.transpose() * dY;
  // Hidden layers, last to first; tanh'(z) = 1 - tanh(z)^2 and the cache
  // stores tanh(z) directly.
  for (std::size_t i = m.hidden.size(); i-- > 0;) {
    const Eigen::MatrixXd dz =
        da.array() * (1.0 - cache.act[i + 1].array().square());
    grad.hidden[i].W.noalias() += dz * cache.act[i].transpose();
    grad.hidden[i].b.noalias() += dz.rowwise().sum();
    da = m.hidden[i].W.transpose() * dz;
  }
  return da;
}

double mlp_mse(const Mlp& m, const Eigen::MatrixXd& X,
               const Eigen::MatrixXd& Y) {
  if (X.cols() != Y.cols())
    fail(ErrorCode::Dimension, "mlp_mse: sample count mismatch");
  const Eigen::MatrixXd E = mlp_forward(m, X) - Y;
  return E.squaredNorm() / static_cast<double>(E.size());
}

double mlp_mse_gradient(const Mlp& m, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& Y, Mlp& grad) {
  if (X.cols() != Y.cols())
    fail(ErrorCode::Dimension, "mlp_mse_gradient: sample count mismatch");
  MlpCache cache;
  const Eigen::MatrixXd out = mlp_forward_cached(m, X, cache);
  for (std::size_t i = 1; i < cache.act.size(); ++i)
    if (!cache.act[i].allFinite())
      fail(ErrorCode::Numeric, "mlp: non-finite value after hidden layer " +
                                   std::to_string(i));
  if (!out.allFinite())
    fail(ErrorCode::Numeric, "mlp: non-finite value at the output layer");
  const Eigen::MatrixXd E = out - Y;
  const double scale = 2.0 / static_cast<double>(E.size());
  mlp_backward(m, cache, scale * E, grad);
  return E.squaredNorm() / static_cast<double>(E.size());
}

Eigen::Index mlp_param_count(const Mlp& m) {
  Eigen::Index n = m.last_weight.size() + m.last_bias.size();
  for (const auto& layer : m.hidden) n += layer.W.size() + layer.b.size();
  return n;
}

namespace {

void pack_matrix(const Eigen::MatrixXd& M, double*& dst) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) *dst++ = M(i, j);
}

void unpack_matrix(Eigen::MatrixXd& M, const double*& src) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = *src++;
}

}  // namespace

void mlp_pack(const Mlp& m, double* dst) {
  for (const auto& layer : m.hidden) {
    pack_matrix(layer.W, dst);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) *dst++ = layer.b(i);
  }
  pack_matrix(m.last_weight, dst);
  for (Eigen::Index i = 0; i < m.last_bias.size(); ++i) *dst++ = m.last_bias(i);
}

void mlp_unpack(Mlp& m, const double* src) {
  for (auto& layer : m.hidden) {
    unpack_matrix(layer.W, src);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = *src++;
  }
  unpack_matrix(m.last_weight, src);
  for (Eigen::Index i = 0; i < m.last_bias.size(); ++i) m.last_bias(i) = *src++;
}

}  // namespace subnet
