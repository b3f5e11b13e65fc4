#include "subnet/model.hpp"

#include <string>

#include "io_util.hpp"
#include "subnet/errors.hpp"
#include "subnet/rng.hpp"

namespace subnet {

void SubnetModel::validate() const {
  if (n_x < 1 || n_u < 1 || n_y < 1 || n_a < 1 || n_b < 1)
    fail(ErrorCode::Dimension, "model: all dimensions and lags must be >= 1");
  auto expect = [](const Eigen::MatrixXd& M, Eigen::Index r, Eigen::Index c,
                   const char* what) {
    if (M.rows() != r || M.cols() != c)
      fail(ErrorCode::Dimension, std::string("model: ") + what + " has wrong shape");
  };
  expect(A, n_x, n_x, "A");
  expect(B, n_x, n_u, "B");
  expect(C, n_y, n_x, "C");
  expect(W_u, n_x, n_b * n_u, "W_u");
  expect(W_y, n_x, n_a * n_y, "W_y");
  if (f_net.in_dim() != n_x + n_u || f_net.out_dim() != n_x)
    fail(ErrorCode::Dimension, "model: f_net must map (n_x+n_u) -> n_x");
  if (h_net.in_dim() != n_x || h_net.out_dim() != n_y)
    fail(ErrorCode::Dimension, "model: h_net must map n_x -> n_y");
  if (psi_net.in_dim() != n_a * n_y + n_b * n_u || psi_net.out_dim() != n_x)
    fail(ErrorCode::Dimension, "model: psi_net must map the stacked windows -> n_x");
}

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.uniform(-bound, bound);
  return M;
}

}  // namespace

SubnetModel subnet_new(Eigen::Index n_x, Eigen::Index n_u, Eigen::Index n_y,
                       Eigen::Index n_a, Eigen::Index n_b,
                       const std::vector<Eigen::Index>& hidden_dims,
                       std::uint64_t seed) {
  if (n_x < 1 || n_u < 1 || n_y < 1 || n_a < 1 || n_b < 1)
    fail(ErrorCode::InvalidArgument, "subnet_new: dimensions and lags must be >= 1");
  if (hidden_dims.empty())
    fail(ErrorCode::InvalidArgument, "subnet_new: need at least one hidden layer");
  Rng rng(seed);
  SubnetModel m;
  m.n_x = n_x; m.n_u = n_u; m.n_y = n_y; m.n_a = n_a; m.n_b = n_b;
  m.A = random_matrix(n_x, n_x, rng);
  m.B = random_matrix(n_x, n_u, rng);
  m.C = random_matrix(n_y, n_x, rng);
  m.W_u = random_matrix(n_x, n_b * n_u, rng);
  m.W_y = random_matrix(n_x, n_a * n_y, rng);
  m.f_net = mlp_init(n_x + n_u, hidden_dims, n_x, rng);
  m.h_net = mlp_init(n_x, hidden_dims, n_y, rng);
  m.psi_net = mlp_init(n_a * n_y + n_b * n_u, hidden_dims, n_x, rng);
  return m;
}

const char* scheme_name(InitScheme s) {
  switch (s) {
    case InitScheme::RanDyRanEnc: return "RanDY+RanENC";
    case InitScheme::LinDyRanEnc: return "LinDY+RanENC";
    case InitScheme::LinDyLinEnc: return "LinDY+LinENC";
  }
  return "?";
}

InitScheme parse_scheme(const std::string& name) {
  if (name == "RanDY+RanENC") return InitScheme::RanDyRanEnc;
  if (name == "LinDY+RanENC") return InitScheme::LinDyRanEnc;
  if (name == "LinDY+LinENC") return InitScheme::LinDyLinEnc;
  fail(ErrorCode::Config, "unknown init scheme '" + name +
                              "' (expected RanDY+RanENC, LinDY+RanENC or "
                              "LinDY+LinENC)");
}

SubnetModel apply_init_scheme(SubnetModel model, InitScheme scheme,
                              const LinearSS* bla, const ReconMaps* maps) {
  model.validate();
  if (scheme == InitScheme::RanDyRanEnc) return model;

  if (!bla)
    fail(ErrorCode::Config, "init scheme " + std::string(scheme_name(scheme)) +
                                " needs a linear estimate");
  bla->validate();
  if (bla->n_x() != model.n_x || bla->n_u() != model.n_u ||
      bla->n_y() != model.n_y)
    fail(ErrorCode::Dimension,
         "init scheme: linear estimate dimensions do not match the model");

  model.A = bla->A;
  model.B = bla->B;
  model.C = bla->C;
  model.f_net.last_weight.setZero();
  model.f_net.last_bias.setZero();
  model.h_net.last_weight.setZero();
  model.h_net.last_bias.setZero();

  if (scheme == InitScheme::LinDyLinEnc) {
    if (!maps)
      fail(ErrorCode::Config, "LinDY+LinENC needs reconstructability maps");
    if (maps->n != model.n_a || maps->n != model.n_b)
      fail(ErrorCode::LagMismatch,
           "LinDY+LinENC: maps window n=" + std::to_string(maps->n) +
               " but model lags are n_a=" + std::to_string(model.n_a) +
               ", n_b=" + std::to_string(model.n_b));
    if (maps->ca_pinv.rows() != model.n_x ||
        maps->ca_pinv.cols() != model.n_a * model.n_y ||
        maps->cab_map.cols() != model.n_b * model.n_u)
      fail(ErrorCode::Dimension, "LinDY+LinENC: maps do not match model sizes");
    model.W_y = maps->ca_pinv;
    model.W_u = maps->ca_pinv * maps->cab_map;
    model.psi_net.last_weight.setZero();
    model.psi_net.last_bias.setZero();
  }
  return model;
}

Eigen::VectorXd encode(const SubnetModel& m, const Eigen::VectorXd& u_past,
                       const Eigen::VectorXd& y_past) {
  if (u_past.size() != m.n_b * m.n_u)
    fail(ErrorCode::Dimension, "encode: u_past length mismatch");
  if (y_past.size() != m.n_a * m.n_y)
    fail(ErrorCode::Dimension, "encode: y_past length mismatch");
  Eigen::VectorXd z(y_past.size() + u_past.size());
  z << y_past, u_past;
  return m.W_u * u_past + m.W_y * y_past + mlp_forward(m.psi_net, z);
}

Eigen::MatrixXd rollout(const SubnetModel& m, const Eigen::VectorXd& x0,
                        const Eigen::MatrixXd& u_seg) {
  if (x0.size() != m.n_x) fail(ErrorCode::Dimension, "rollout: x0 size mismatch");
  if (u_seg.rows() != m.n_u)
    fail(ErrorCode::Dimension, "rollout: input channel mismatch");
  const Eigen::Index T = u_seg.cols();
  Eigen::MatrixXd y(m.n_y, T);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd xu(m.n_x + m.n_u);
  for (Eigen::Index k = 0; k < T; ++k) {
    y.col(k) = m.C * x + mlp_forward(m.h_net, x);
    xu << x, u_seg.col(k);
    x = m.A * x + m.B * u_seg.col(k) + mlp_forward(m.f_net, xu);
    if (!x.allFinite())
      fail(ErrorCode::Divergence,
           "rollout: state became non-finite at step " + std::to_string(k));
  }
  if (!y.allFinite())
    fail(ErrorCode::Divergence, "rollout: output became non-finite");
  return y;
}

Eigen::VectorXd stack_u_window(const Eigen::MatrixXd& u, Eigen::Index t,
                               Eigen::Index n_b) {
  if (t < n_b || t > u.cols())
    fail(ErrorCode::InvalidArgument, "stack_u_window: window out of range");
  const Eigen::Index n_u = u.rows();
  Eigen::VectorXd w(n_b * n_u);
  for (Eigen::Index k = 0; k < n_b; ++k) w.segment(k * n_u, n_u) = u.col(t - 1 - k);
  return w;  // newest first
}

Eigen::VectorXd stack_y_window(const Eigen::MatrixXd& y, Eigen::Index t,
                               Eigen::Index n_a) {
  if (t < n_a || t > y.cols())
    fail(ErrorCode::InvalidArgument, "stack_y_window: window out of range");
  const Eigen::Index n_y = y.rows();
  Eigen::VectorXd w(n_a * n_y);
  for (Eigen::Index k = 0; k < n_a; ++k)
    w.segment(k * n_y, n_y) = y.col(t - n_a + k);
  return w;  // oldest first
}

Eigen::Index param_count(const SubnetModel& m) {
  return m.A.size() + m.B.size() + m.C.size() + m.W_u.size() + m.W_y.size() +
         mlp_param_count(m.f_net) + mlp_param_count(m.h_net) +
         mlp_param_count(m.psi_net);
}

namespace {

void pack_rowmajor(const Eigen::MatrixXd& M, double*& dst) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) *dst++ = M(i, j);
}

void unpack_rowmajor(Eigen::MatrixXd& M, const double*& src) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = *src++;
}

}  // namespace

Eigen::VectorXd flatten_params(const SubnetModel& m) {
  Eigen::VectorXd theta(param_count(m));
  double* p = theta.data();
  pack_rowmajor(m.A, p);
  pack_rowmajor(m.B, p);
  pack_rowmajor(m.C, p);
  pack_rowmajor(m.W_u, p);
  pack_rowmajor(m.W_y, p);
  mlp_pack(m.f_net, p);
  p += mlp_param_count(m.f_net);
  mlp_pack(m.h_net, p);
  p += mlp_param_count(m.h_net);
  mlp_pack(m.psi_net, p);
  return theta;
}

void set_params(SubnetModel& m, const Eigen::VectorXd& theta) {
  if (theta.size() != param_count(m))
    fail(ErrorCode::Dimension, "set_params: parameter vector length mismatch");
  const double* p = theta.data();
  unpack_rowmajor(m.A, p);
  unpack_rowmajor(m.B, p);
  unpack_rowmajor(m.C, p);
  unpack_rowmajor(m.W_u, p);
  unpack_rowmajor(m.W_y, p);
  mlp_unpack(m.f_net, p);
  p += mlp_param_count(m.f_net);
  mlp_unpack(m.h_net, p);
  p += mlp_param_count(m.h_net);
  mlp_unpack(m.psi_net, p);
}

namespace {

nlohmann::json mlp_to_json(const Mlp& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : m.hidden) {
    nlohmann::json l;
    l["W"] = detail::matrix_to_json(layer.W);
    l["b"] = detail::vector_to_json(layer.b);
    layers.push_back(std::move(l));
  }
  nlohmann::json j;
  j["hidden"] = std::move(layers);
  j["last_weight"] = detail::matrix_to_json(m.last_weight);
  j["last_bias"] = detail::vector_to_json(m.last_bias);
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j, const std::string& where) {
  Mlp m;
  for (const auto& l : detail::require_field(j, "hidden", where)) {
    DenseLayer layer;
    layer.W = detail::matrix_from_json(detail::require_field(l, "W", where),
                                       where + ".W");
    layer.b = detail::vector_from_json(detail::require_field(l, "b", where),
                                       where + ".b");
    m.hidden.push_back(std::move(layer));
  }
  m.last_weight = detail::matrix_from_json(
      detail::require_field(j, "last_weight", where), where + ".last_weight");
  m.last_bias = detail::vector_from_json(
      detail::require_field(j, "last_bias", where), where + ".last_bias");
  return m;
}

}  // namespace

void save_model(const SubnetModel& m, const std::string& path) {
  m.validate();
  nlohmann::json j;
  j["n_x"] = m.n_x; j["n_u"] = m.n_u; j["n_y"] = m.n_y;
  j["n_a"] = m.n_a; j["n_b"] = m.n_b;
  j["A"] = detail::matrix_to_json(m.A);
  j["B"] = detail::matrix_to_json(m.B);
  j["C"] = detail::matrix_to_json(m.C);
  j["W_u"] = detail::matrix_to_json(m.W_u);
  j["W_y"] = detail::matrix_to_json(m.W_y);
  j["f_net"] = mlp_to_json(m.f_net);
  j["h_net"] = mlp_to_json(m.h_net);
  j["psi_net"] = mlp_to_json(m.psi_net);
  if (m.normalizer) {
    nlohmann::json nz;
    nz["mean_u"] = detail::vector_to_json(m.normalizer->mean_u);
    nz["std_u"] = detail::vector_to_json(m.normalizer->std_u);
    nz["mean_y"] = detail::vector_to_json(m.normalizer->mean_y);
    nz["std_y"] = detail::vector_to_json(m.normalizer->std_y);
    j["normalizer"] = std::move(nz);
  }
  detail::save_json_file(j, path);
}

SubnetModel load_model(const std::string& path) {
  auto j = detail::load_json_file(path);
  SubnetModel m;
  m.n_x = detail::require_field(j, "n_x", path).get<Eigen::Index>();
  m.n_u = detail::require_field(j, "n_u", path).get<Eigen::Index>();
  m.n_y = detail::require_field(j, "n_y", path).get<Eigen::Index>();
  m.n_a = detail::require_field(j, "n_a", path).get<Eigen::Index>();
  m.n_b = detail::require_field(j, "n_b", path).get<Eigen::Index>();
  m.A = detail::matrix_from_json(detail::require_field(j, "A", path), path + ":A");
  m.B = detail::matrix_from_json(detail::require_field(j, "B", path), path + ":B");
  m.C = detail::matrix_from_json(detail::require_field(j, "C", path), path + ":C");
  m.W_u = detail::matrix_from_json(detail::require_field(j, "W_u", path), path + ":W_u");
  m.W_y = detail::matrix_from_json(detail::require_field(j, "W_y", path), path + ":W_y");
  m.f_net = mlp_from_json(detail::require_field(j, "f_net", path), path + ":f_net");
  m.h_net = mlp_from_json(detail::require_field(j, "h_net", path), path + ":h_net");
  m.psi_net =
      mlp_from_json(detail::require_field(j, "psi_net", path), path + ":psi_net");
  if (j.contains("normalizer")) {
    const auto& nz = j["normalizer"];
    Normalizer n;
    n.mean_u = detail::vector_from_json(detail::require_field(nz, "mean_u", path), path);
    n.std_u = detail::vector_from_json(detail::require_field(nz, "std_u", path), path);
    n.mean_y = detail::vector_from_json(detail::require_field(nz, "mean_y", path), path);
    n.std_y = detail::vector_from_json(detail::require_field(nz, "std_y", path), path);
    m.normalizer = std::move(n);
  }
  m.validate();
  return m;
}

}  // namespace subnet
