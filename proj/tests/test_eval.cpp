#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "subnet/eval.hpp"
#include "test_util.hpp"

using namespace subnet;

namespace {

Normalizer plain_scaling(double su, double sy) {
  Normalizer nz;
  nz.mean_u = Eigen::VectorXd::Zero(1);
  nz.std_u = Eigen::VectorXd::Constant(1, su);
  nz.mean_y = Eigen::VectorXd::Zero(1);
  nz.std_y = Eigen::VectorXd::Constant(1, sy);
  return nz;
}

}  // namespace

TEST_CASE("nrms: exact values and scale invariance") {
  Eigen::MatrixXd y(1, 2), zero(1, 2);
  y << 1, -1;  // population std 1
  zero.setZero();
  CHECK(nrms(y, y) == 0.0);
  CHECK(nrms(zero, y) == doctest::Approx(1.0));

  Rng rng(2);
  Eigen::MatrixXd t = random_matrix(2, 50, rng);
  Eigen::MatrixXd p = t + 0.1 * random_matrix(2, 50, rng);
  CHECK(nrms(3.0 * p, 3.0 * t) == doctest::Approx(nrms(p, t)).epsilon(1e-12));

  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(1, 10, 2.0);
  CHECK(throws_code([&] { nrms(flat, flat); }, ErrorCode::DegenerateData));
  CHECK(throws_code([&] { nrms(zero, y.leftCols(1)); }, ErrorCode::Dimension));
}

TEST_CASE("percent_nl is the documented affine map") {
  CHECK(percent_nl(0.95) == doctest::Approx(5.0));
  CHECK(percent_nl(1.0) == doctest::Approx(0.0));
  CHECK(percent_nl(0.0) == doctest::Approx(100.0));
  CHECK(percent_nl(1.5) == doctest::Approx(-50.0));  // warned, not rejected
  CHECK(throws_code([&] { percent_nl(-0.1); }, ErrorCode::InvalidArgument));
  CHECK(throws_code(
      [&] { percent_nl(std::numeric_limits<double>::quiet_NaN()); },
      ErrorCode::InvalidArgument));
}

TEST_CASE("simulate_model reproduces a linear record exactly") {
  // Raw record from a known linear system; the model carries a pure scaling
  // normalizer, so in normalized coordinates the plant is (A, B*su, C/sy).
  Rng rng(44);
  LinearSS raw_sys = random_stable_ss(2, 1, 1, rng);
  Eigen::MatrixXd u = random_matrix(1, 50, rng);
  Dataset raw;
  raw.u = u;
  raw.y = simulate_lss(raw_sys, u, Eigen::VectorXd::Zero(2));

  const double su = 2.0, sy = 0.5;
  LinearSS norm_sys = raw_sys;
  norm_sys.B *= su;
  norm_sys.C /= sy;
  ReconMaps maps = build_recon_maps(norm_sys, 2);
  SubnetModel m = apply_init_scheme(subnet_new(2, 1, 1, 2, 2, {8}, 7),
                                    InitScheme::LinDyLinEnc, &norm_sys, &maps);
  m.normalizer = plain_scaling(su, sy);

  Eigen::MatrixXd yhat = simulate_model(m, raw);
  REQUIRE(yhat.cols() == 50 - m.lag());
  CHECK((yhat - raw.y.rightCols(48)).cwiseAbs().maxCoeff() < 1e-9);

  EvalReport rep = evaluate_model(m, raw);
  CHECK(rep.nrms < 1e-9);
  CHECK(rep.n == m.lag());
  CHECK_FALSE(rep.percent_nl.has_value());
}

TEST_CASE("simulate_model boundary and config errors") {
  SubnetModel m = subnet_new(2, 1, 1, 2, 2, {4}, 3);
  Dataset ds;
  ds.u = Eigen::MatrixXd::Ones(1, 3);
  ds.y = Eigen::MatrixXd::Ones(1, 3) * 0.5;

  CHECK(throws_code([&] { simulate_model(m, ds); }, ErrorCode::Config));

  m.normalizer = plain_scaling(1.0, 1.0);
  Eigen::MatrixXd out = simulate_model(m, ds);  // N = lag + 1: one sample
  CHECK(out.cols() == 1);

  Dataset too_short;
  too_short.u = Eigen::MatrixXd::Ones(1, 2);
  too_short.y = Eigen::MatrixXd::Ones(1, 2);
  CHECK(throws_code([&] { simulate_model(m, too_short); },
                    ErrorCode::InvalidArgument));
}

TEST_CASE("evaluate_lss scores a linear model with skip handling") {
  Rng rng(15);
  LinearSS ss = random_stable_ss(2, 1, 1, rng);
  Dataset raw;
  raw.u = random_matrix(1, 60, rng);
  raw.y = simulate_lss(ss, raw.u, Eigen::VectorXd::Zero(2));

  // identity scaling: the record already lives in normalized coordinates
  EvalReport rep = evaluate_lss(ss, raw, plain_scaling(1.0, 1.0), 4);
  CHECK(rep.nrms < 1e-12);
  REQUIRE(rep.percent_nl.has_value());
  CHECK(*rep.percent_nl == doctest::Approx(100.0));
  CHECK(rep.n == 4);
  CHECK(rep.y_true.cols() == 56);
  CHECK((rep.y_true - raw.y.rightCols(56)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(throws_code(
      [&] { evaluate_lss(ss, raw, plain_scaling(1.0, 1.0), 60); },
      ErrorCode::InvalidArgument));
}

TEST_CASE("eval report json and error csv") {
  const std::string dir = scratch_dir("eval_io");
  EvalReport rep;
  rep.nrms = 0.25;
  rep.percent_nl = 75.0;
  rep.n = 2;
  rep.y_true.resize(1, 3);
  rep.y_true << 1, 2, 3;
  rep.y_hat.resize(1, 3);
  rep.y_hat << 1.5, 2, 2.5;

  save_eval_report(rep, dir + "/r.json");
  std::ifstream f(dir + "/r.json");
  nlohmann::json j;
  f >> j;
  CHECK(j.at("nrms").get<double>() == 0.25);
  CHECK(j.at("percent_nl").get<double>() == 75.0);
  CHECK(j.at("nl_level_percent").get<double>() == doctest::Approx(25.0));
  CHECK(j.at("n").get<int>() == 2);
  CHECK(j.at("n_scored").get<int>() == 3);

  save_eval_errors_csv(rep, dir + "/e.csv");
  std::ifstream c(dir + "/e.csv");
  std::string line;
  std::getline(c, line);
  CHECK(line == "t,y,y_hat,err");
  std::getline(c, line);
  CHECK(line.substr(0, 2) == "2,");  // first scored sample sits at t = n
  int rows = 1;
  while (std::getline(c, line)) ++rows;
  CHECK(rows == 3);
}
