#include "subnet/wh_sim.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "io_util.hpp"
#include "subnet/errors.hpp"
#include "subnet/eval.hpp"
#include "subnet/n4sid.hpp"
#include "subnet/rng.hpp"

namespace subnet {

LinearSS butterworth2_lowpass(double cutoff_hz, double sample_rate_hz) {
  if (cutoff_hz <= 0 || sample_rate_hz <= 0)
    fail(ErrorCode::InvalidArgument, "butterworth: frequencies must be positive");
  if (cutoff_hz >= sample_rate_hz / 2)
    fail(ErrorCode::InvalidArgument, "butterworth: cutoff must be below Nyquist");
  const double w = 2.0 * std::numbers::pi * cutoff_hz;
  // Analog prototype w^2 / (s^2 + sqrt(2) w s + w^2) in controllable
  // canonical form, then exact zero-order-hold discretization through the
  // augmented-matrix exponential (Van Loan).
  Eigen::Matrix2d Ac;
  Ac << -std::numbers::sqrt2 * w, -w * w, 1.0, 0.0;
  Eigen::Vector2d Bc(1.0, 0.0);
  Eigen::RowVector2d Cc(0.0, w * w);

  const double T = 1.0 / sample_rate_hz;
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  M.topLeftCorner<2, 2>() = Ac * T;
  M.topRightCorner<2, 1>() = Bc * T;
  Eigen::Matrix3d E = M.exp();

  LinearSS ss;
  ss.A = E.topLeftCorner<2, 2>();
  ss.B = E.topRightCorner<2, 1>();
  ss.C = Cc;
  return ss;
}

WhSystemConfig default_wh_config() {
  WhSystemConfig cfg;
  const LinearSS g1 = butterworth2_lowpass(200.0, 1000.0);
  const LinearSS g2 = butterworth2_lowpass(350.0, 1000.0);
  cfg.A1 = g1.A; cfg.B1 = g1.B; cfg.C1 = g1.C;
  cfg.A2 = g2.A; cfg.B2 = g2.B; cfg.C2 = g2.C;
  return cfg;
}

Dataset simulate_wh(const WhSystemConfig& cfg, const Eigen::MatrixXd& u,
                    double noise_std, std::uint64_t noise_seed) {
  if (u.rows() != 1)
    fail(ErrorCode::Dimension, "simulate_wh: expected a single input channel");
  if (!u.allFinite())
    fail(ErrorCode::InvalidArgument, "simulate_wh: non-finite input");
  if (spectral_radius(cfg.A1) >= 1.0 || spectral_radius(cfg.A2) >= 1.0)
    fail(ErrorCode::Stability, "simulate_wh: a linear block is not Schur stable");
  if (noise_std < 0)
    fail(ErrorCode::InvalidArgument, "simulate_wh: negative noise std");

  const Eigen::Index N = u.cols();
  Dataset ds;
  ds.u = u;
  ds.y.resize(1, N);
  ds.sample_rate = cfg.sample_rate;

  Eigen::Vector2d x1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d x2 = Eigen::Vector2d::Zero();
  const bool sine = cfg.nonlinearity == WhNonlinearity::Sine;
  for (Eigen::Index t = 0; t < N; ++t) {
    ds.y(0, t) = (cfg.C2 * x2)(0);
    const double w = (cfg.C1 * x1)(0);     // current inner signal
    const double g = sine ? std::sin(w) : w;
    x1 = cfg.A1 * x1 + cfg.B1 * u(0, t);
    x2 = cfg.A2 * x2 + cfg.B2 * g;
  }
  if (noise_std > 0) {
    Rng rng(noise_seed);
    for (Eigen::Index t = 0; t < N; ++t) ds.y(0, t) += noise_std * rng.gaussian();
  }
  return ds;
}

Dataset generate_wh_dataset(const WhSystemConfig& cfg, Eigen::Index n_samples,
                            std::uint64_t seed, double noise_std) {
  Eigen::MatrixXd u =
      generate_white_gaussian(n_samples, cfg.input_std, derive_seed(seed, 0));
  return simulate_wh(cfg, u, noise_std, derive_seed(seed, 1));
}

double measure_nl_level(const Dataset& ds, Eigen::Index bla_order,
                        Eigen::Index horizon, Eigen::Index skip) {
  const Normalizer nz = fit_normalizer(ds);
  const Dataset dsn = apply_normalizer(ds, nz);
  N4sidOptions opts;
  opts.horizon = horizon;
  const LinearSS bla = n4sid_estimate(dsn, bla_order, opts);
  if (skip < 0) skip = bla_order;
  if (ds.n_samples() <= skip + 1)
    fail(ErrorCode::InvalidArgument, "measure_nl_level: record too short");
  const Eigen::MatrixXd y_hat =
      simulate_lss(bla, dsn.u, Eigen::VectorXd::Zero(bla.n_x()));
  const Eigen::Index scored = ds.n_samples() - skip;
  return 100.0 * nrms(y_hat.rightCols(scored), dsn.y.rightCols(scored));
}

CalibrationResult calibrate_input_std(const WhSystemConfig& cfg,
                                      double target_nl, std::uint64_t seed,
                                      const CalibrationOptions& opts) {
  if (target_nl < 0.5 || target_nl > 60.0)
    fail(ErrorCode::InvalidArgument,
         "calibrate: target nonlinearity level must lie in [0.5, 60]");
  if (opts.std_lo <= 0 || opts.std_hi <= opts.std_lo)
    fail(ErrorCode::InvalidArgument, "calibrate: bad bracket");

  // Calibration runs on one fixed seeded unit-variance record so the level
  // is a deterministic function of the input std and bisection is exact.
  const Eigen::MatrixXd u_unit =
      generate_white_gaussian(opts.n_samples, 1.0, derive_seed(seed, 0xCA1));
  int evals = 0;
  auto level_at = [&](double s) {
    ++evals;
    WhSystemConfig c = cfg;
    c.input_std = s;
    Dataset ds = simulate_wh(c, s * u_unit);
    return measure_nl_level(ds, opts.bla_order, opts.horizon);
  };

  double lo = opts.std_lo, hi = opts.std_hi;
  double f_lo = level_at(lo);
  if (std::abs(f_lo - target_nl) <= opts.tolerance)
    return {lo, f_lo, evals};
  double f_hi = level_at(hi);
  if (std::abs(f_hi - target_nl) <= opts.tolerance)
    return {hi, f_hi, evals};
  if (f_lo > target_nl || f_hi < target_nl)
    fail(ErrorCode::Calibration,
         "calibrate: target " + std::to_string(target_nl) +
             " lies outside the achievable range [" + std::to_string(f_lo) +
             ", " + std::to_string(f_hi) + "] for this bracket");

  double best_std = lo, best_nl = f_lo;
  while (evals < opts.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = level_at(mid);
    if (std::abs(f_mid - target_nl) < std::abs(best_nl - target_nl)) {
      best_std = mid;
      best_nl = f_mid;
    }
    if (std::abs(f_mid - target_nl) <= opts.tolerance)
      return {mid, f_mid, evals};
    if (f_mid < target_nl)
      lo = mid;
    else
      hi = mid;
  }
  fail(ErrorCode::Calibration,
       "calibrate: no convergence in " + std::to_string(opts.max_iterations) +
           " evaluations; best achieved " + std::to_string(best_nl) +
           " at std " + std::to_string(best_std));
}

namespace {

Eigen::MatrixXd fixed_mat(const nlohmann::json& j, Eigen::Index rows,
                          Eigen::Index cols, const std::string& what) {
  Eigen::MatrixXd m = detail::matrix_from_json(j, what);
  if (m.rows() != rows || m.cols() != cols)
    fail(ErrorCode::Schema, what + ": expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  return m;
}

}  // namespace

void save_wh_config(const WhSystemConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["A1"] = detail::matrix_to_json(cfg.A1);
  j["B1"] = detail::matrix_to_json(cfg.B1);
  j["C1"] = detail::matrix_to_json(cfg.C1);
  j["A2"] = detail::matrix_to_json(cfg.A2);
  j["B2"] = detail::matrix_to_json(cfg.B2);
  j["C2"] = detail::matrix_to_json(cfg.C2);
  j["nonlinearity"] =
      cfg.nonlinearity == WhNonlinearity::Sine ? "sine" : "identity";
  j["sample_rate"] = cfg.sample_rate;
  j["input_std"] = cfg.input_std;
  detail::save_json_file(j, path);
}

WhSystemConfig load_wh_config(const std::string& path) {
  auto j = detail::load_json_file(path);
  WhSystemConfig cfg;
  cfg.A1 = fixed_mat(detail::require_field(j, "A1", path), 2, 2, path + ":A1");
  cfg.B1 = fixed_mat(detail::require_field(j, "B1", path), 2, 1, path + ":B1");
  cfg.C1 = fixed_mat(detail::require_field(j, "C1", path), 1, 2, path + ":C1");
  cfg.A2 = fixed_mat(detail::require_field(j, "A2", path), 2, 2, path + ":A2");
  cfg.B2 = fixed_mat(detail::require_field(j, "B2", path), 2, 1, path + ":B2");
  cfg.C2 = fixed_mat(detail::require_field(j, "C2", path), 1, 2, path + ":C2");
  const std::string nl =
      detail::require_field(j, "nonlinearity", path).get<std::string>();
  if (nl == "sine")
    cfg.nonlinearity = WhNonlinearity::Sine;
  else if (nl == "identity")
    cfg.nonlinearity = WhNonlinearity::Identity;
  else
    fail(ErrorCode::Schema, path + ": unknown nonlinearity '" + nl + "'");
  cfg.sample_rate = detail::require_field(j, "sample_rate", path).get<double>();
  cfg.input_std = detail::require_field(j, "input_std", path).get<double>();
  return cfg;
}

}  // namespace subnet
