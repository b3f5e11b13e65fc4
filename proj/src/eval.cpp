#include "subnet/eval.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "io_util.hpp"
#include "subnet/errors.hpp"

namespace subnet {

double nrms(const Eigen::MatrixXd& y_hat, const Eigen::MatrixXd& y) {
  if (y_hat.rows() != y.rows() || y_hat.cols() != y.cols())
    fail(ErrorCode::Dimension, "nrms: shape mismatch");
  if (y.cols() < 1) fail(ErrorCode::InvalidArgument, "nrms: empty signals");
  const Eigen::VectorXd mean = y.rowwise().mean();
  const double var =
      (y.colwise() - mean).squaredNorm() / static_cast<double>(y.size());
  const double sigma = std::sqrt(var);
  const double y_scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (sigma < 1e-12 * y_scale)
    fail(ErrorCode::DegenerateData, "nrms: output has (near) zero variance");
  const double rms =
      std::sqrt((y_hat - y).squaredNorm() / static_cast<double>(y.size()));
  return rms / sigma;
}

double percent_nl(double nrms_bla) {
  if (!(nrms_bla >= 0.0) || !std::isfinite(nrms_bla))
    fail(ErrorCode::InvalidArgument, "percent_nl: nrms must be finite and >= 0");
  if (nrms_bla > 1.0)
    std::cerr << "warning: percent_nl: BLA NRMS " << nrms_bla
              << " exceeds 1; the percentage goes negative\n";
  return (1.0 - nrms_bla) * 100.0;
}

Eigen::MatrixXd simulate_model(const SubnetModel& m, const Dataset& ds_raw) {
  m.validate();
  ds_raw.validate();
  if (!m.normalizer)
    fail(ErrorCode::Config,
         "simulate_model: model carries no normalizer; cannot scale raw data");
  if (ds_raw.n_u() != m.n_u || ds_raw.n_y() != m.n_y)
    fail(ErrorCode::Dimension, "simulate_model: channel mismatch");
  const Eigen::Index N = ds_raw.n_samples(), lag = m.lag();
  if (N < lag + 1)
    fail(ErrorCode::InvalidArgument,
         "simulate_model: record needs at least lag+1 = " +
             std::to_string(lag + 1) + " samples");

  const Dataset ds = apply_normalizer(ds_raw, *m.normalizer);
  Eigen::VectorXd x = encode(m, stack_u_window(ds.u, lag, m.n_b),
                             stack_y_window(ds.y, lag, m.n_a));
  Eigen::MatrixXd y_hat(m.n_y, N - lag);
  Eigen::VectorXd xu(m.n_x + m.n_u);
  for (Eigen::Index t = lag; t < N; ++t) {
    if (!x.allFinite())
      fail(ErrorCode::Divergence,
           "simulate_model: state became non-finite at sample " +
               std::to_string(t));
    y_hat.col(t - lag) = m.C * x + mlp_forward(m.h_net, x);
    xu << x, ds.u.col(t);
    x = m.A * x + m.B * ds.u.col(t) + mlp_forward(m.f_net, xu);
  }
  if (!y_hat.allFinite())
    fail(ErrorCode::Divergence, "simulate_model: output became non-finite");
  // Back to physical units.
  return (y_hat.array().colwise() * m.normalizer->std_y.array()).colwise() +
         m.normalizer->mean_y.array();
}

EvalReport evaluate_model(const SubnetModel& m, const Dataset& ds_raw) {
  EvalReport r;
  r.n = m.lag();
  r.y_hat = simulate_model(m, ds_raw);
  r.y_true = ds_raw.y.rightCols(ds_raw.n_samples() - r.n);
  r.nrms = nrms(r.y_hat, r.y_true);
  return r;
}

EvalReport evaluate_lss(const LinearSS& ss, const Dataset& ds_raw,
                        const Normalizer& nz, Eigen::Index skip) {
  ss.validate();
  ds_raw.validate();
  if (skip < 0 || skip >= ds_raw.n_samples() - 1)
    fail(ErrorCode::InvalidArgument, "evaluate_lss: bad skip length");
  const Dataset ds = apply_normalizer(ds_raw, nz);
  const Eigen::MatrixXd y_hat =
      simulate_lss(ss, ds.u, Eigen::VectorXd::Zero(ss.n_x()));
  const Eigen::Index scored = ds.n_samples() - skip;
  EvalReport r;
  r.n = skip;
  r.nrms = nrms(y_hat.rightCols(scored), ds.y.rightCols(scored));
  r.percent_nl = percent_nl(r.nrms);
  r.y_hat = (y_hat.rightCols(scored).array().colwise() * nz.std_y.array())
                .colwise() +
            nz.mean_y.array();
  r.y_true = ds_raw.y.rightCols(scored);
  return r;
}

void save_eval_report(const EvalReport& r, const std::string& json_path) {
  nlohmann::json j;
  j["nrms"] = r.nrms;
  j["n"] = r.n;
  j["n_scored"] = r.y_true.cols();
  if (r.percent_nl) {
    j["percent_nl"] = *r.percent_nl;
    // The experiment pipeline's nonlinearity level: NRMS as a percentage.
    j["nl_level_percent"] = 100.0 * r.nrms;
  }
  detail::save_json_file(j, json_path);
}

void save_eval_errors_csv(const EvalReport& r, const std::string& csv_path) {
  auto f = detail::open_out(csv_path);
  const Eigen::Index ny = r.y_true.rows();
  if (ny == 1) {
    f << "t,y,y_hat,err\n";
  } else {
    f << "t";
    for (Eigen::Index k = 0; k < ny; ++k)
      f << ",y_" << k << ",y_hat_" << k << ",err_" << k;
    f << '\n';
  }
  for (Eigen::Index c = 0; c < r.y_true.cols(); ++c) {
    f << (r.n + c);
    for (Eigen::Index k = 0; k < ny; ++k)
      f << ',' << detail::fmt_double(r.y_true(k, c)) << ','
        << detail::fmt_double(r.y_hat(k, c)) << ','
        << detail::fmt_double(r.y_hat(k, c) - r.y_true(k, c));
    f << '\n';
  }
  if (!f) fail(ErrorCode::Io, "write failed: " + csv_path);
}

}  // namespace subnet
