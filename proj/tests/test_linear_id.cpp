#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "subnet/dataset.hpp"
#include "subnet/linear_ss.hpp"
#include "subnet/n4sid.hpp"
#include "test_util.hpp"

using namespace subnet;

namespace {

LinearSS scalar_ss(double a, double b, double c) {
  LinearSS ss;
  ss.A.resize(1, 1);
  ss.A << a;
  ss.B.resize(1, 1);
  ss.B << b;
  ss.C.resize(1, 1);
  ss.C << c;
  return ss;
}

std::vector<std::complex<double>> sorted_eigs(const Eigen::MatrixXd& A) {
  auto e = eigenvalues(A);
  std::sort(e.begin(), e.end(), [](auto l, auto r) {
    return l.real() != r.real() ? l.real() < r.real() : l.imag() < r.imag();
  });
  return e;
}

}  // namespace

TEST_CASE("simulate_lss reads the output before the state update") {
  LinearSS ss = scalar_ss(0.5, 1.0, 2.0);
  Eigen::MatrixXd u(1, 3);
  u << 1, 0, 0;
  Eigen::MatrixXd y = simulate_lss(ss, u, Eigen::VectorXd::Zero(1));
  REQUIRE(y.cols() == 3);
  CHECK(y(0, 0) == 0.0);  // x0 = 0
  CHECK(y(0, 1) == 2.0);  // x1 = 1
  CHECK(y(0, 2) == 1.0);  // x2 = 0.5
}

TEST_CASE("spectral radius and eigenvalues") {
  Eigen::MatrixXd A(2, 2);
  A << 0.3, 0, 0, -0.5;
  auto e = sorted_eigs(A);
  CHECK(e[0].real() == doctest::Approx(-0.5));
  CHECK(e[1].real() == doctest::Approx(0.3));
  CHECK(spectral_radius(A) == doctest::Approx(0.5));
}

TEST_CASE("stabilize_discrete reflects only the unstable eigenvalues") {
  // Already-stable input comes back as the same object, bitwise.
  Rng rng(11);
  Eigen::MatrixXd S = random_stable_ss(4, 1, 1, rng).A;
  CHECK(stabilize_discrete(S) == S);

  // Real spectrum {1.2, 0.5}: 1.2 reflects to 0.999^2/1.2, 0.5 stays.
  Eigen::MatrixXd A(2, 2);
  A << 1.2, 0.7, 0.0, 0.5;
  Eigen::MatrixXd As = stabilize_discrete(A);
  auto e = sorted_eigs(As);
  CHECK(std::abs(e[0] - std::complex<double>(0.5, 0)) < 1e-12);
  CHECK(std::abs(e[1] - std::complex<double>(0.999 * 0.999 / 1.2, 0)) < 1e-12);

  // Complex pair at radius 1.1, angle +-0.3: radius maps to 0.999^2/1.1,
  // the angle is kept, and the reconstruction is real.
  const double r = 1.1, th = 0.3;
  Eigen::MatrixXd R(2, 2);
  R << r * std::cos(th), -r * std::sin(th), r * std::sin(th), r * std::cos(th);
  Eigen::MatrixXd Rs = stabilize_discrete(R);
  CHECK(Rs.allFinite());
  const double rr = 0.999 * 0.999 / r;
  auto er = sorted_eigs(Rs);
  CHECK(std::abs(er[0] - std::polar(rr, -th)) < 1e-12);
  CHECK(std::abs(er[1] - std::polar(rr, th)) < 1e-12);
  CHECK(spectral_radius(Rs) < 1.0);

  CHECK_THROWS(stabilize_discrete(Eigen::MatrixXd::Zero(2, 3)));
  CHECK_THROWS(stabilize_discrete(A, 1.5));
}

TEST_CASE("pinv_svd satisfies the Moore-Penrose identities") {
  Rng rng(5);
  Eigen::MatrixXd M = random_matrix(5, 3, rng);
  Eigen::MatrixXd P = pinv_svd(M);
  CHECK((M * P * M - M).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((P * M * P - P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(((M * P).transpose() - M * P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(((P * M).transpose() - P * M).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd S(2, 2);
  S << 1, 0, 0, 0;
  Eigen::Index rank = -1;
  Eigen::MatrixXd Sp = pinv_svd(S, 1e-10, &rank);
  CHECK(rank == 1);
  CHECK((Sp - S).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("recon maps match hand-computed scalar cases") {
  LinearSS ss = scalar_ss(0.5, 1.0, 2.0);

  ReconMaps m1 = build_recon_maps(ss, 1);
  // c/a = 4, c*b/a = 4, pinv = 1/4
  CHECK(m1.ca_map(0, 0) == doctest::Approx(4.0));
  CHECK(m1.cab_map(0, 0) == doctest::Approx(4.0));
  CHECK(m1.ca_pinv(0, 0) == doctest::Approx(0.25));

  ReconMaps m2 = build_recon_maps(ss, 2);
  REQUIRE(m2.ca_map.rows() == 2);
  CHECK(m2.ca_map(0, 0) == doctest::Approx(8.0));  // oldest row: c/a^2
  CHECK(m2.ca_map(1, 0) == doctest::Approx(4.0));
  // u window is newest-first, so column 0 pairs with u_{t-1}
  CHECK(m2.cab_map(0, 0) == doctest::Approx(8.0));
  CHECK(m2.cab_map(0, 1) == doctest::Approx(4.0));
  CHECK(m2.cab_map(1, 0) == doctest::Approx(4.0));
  CHECK(m2.cab_map(1, 1) == 0.0);  // would need A^0 term: structural zero
}

TEST_CASE("recon maps: left inverse and window identity") {
  Rng rng(17);
  LinearSS ss = random_stable_ss(3, 2, 2, rng);
  ReconMaps maps = build_recon_maps(ss, 3);

  CHECK((maps.ca_pinv * maps.ca_map - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  // Noiseless record; check y_past = ca_map x_t - cab_map u_past directly.
  Eigen::MatrixXd u = random_matrix(2, 40, rng);
  Eigen::MatrixXd y(2, 40);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  std::vector<Eigen::VectorXd> states;
  for (int t = 0; t < 40; ++t) {
    states.push_back(x);
    y.col(t) = ss.C * x;
    x = ss.A * x + ss.B * u.col(t);
  }
  const Eigen::Index n = 3, t = 20;
  Eigen::VectorXd y_past(n * 2), u_past(n * 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    y_past.segment(2 * k, 2) = y.col(t - n + k);   // oldest first
    u_past.segment(2 * k, 2) = u.col(t - 1 - k);   // newest first
  }
  Eigen::VectorXd lhs = maps.ca_map * states[t] - maps.cab_map * u_past;
  CHECK((lhs - y_past).cwiseAbs().maxCoeff() < 1e-9);

  Eigen::VectorXd xr = reconstruct_state(maps, y_past, u_past);
  CHECK((xr - states[t]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("reconstruct_state recovers 4th-order states on fresh systems") {
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(100 + trial);
    LinearSS ss = random_stable_ss(4, 1, 1, rng);
    ReconMaps maps = build_recon_maps(ss, 4);

    Eigen::MatrixXd u = random_matrix(1, 60, rng);
    Eigen::MatrixXd y(1, 60);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    std::vector<Eigen::VectorXd> states;
    for (int t = 0; t < 60; ++t) {
      states.push_back(x);
      y.col(t) = ss.C * x;
      x = ss.A * x + ss.B * u.col(t);
    }
    for (Eigen::Index t : {4L, 17L, 59L}) {
      Eigen::VectorXd y_past(4), u_past(4);
      for (Eigen::Index k = 0; k < 4; ++k) {
        y_past(k) = y(0, t - 4 + k);
        u_past(k) = u(0, t - 1 - k);
      }
      Eigen::VectorXd xr = reconstruct_state(maps, y_past, u_past);
      const double scale = std::max(1.0, states[t].norm());
      CHECK((xr - states[t]).norm() / scale < 1e-8);
    }
  }
}

TEST_CASE("recon maps reject singular A and short windows") {
  LinearSS ss = scalar_ss(0.0, 1.0, 2.0);
  CHECK(throws_code([&] { build_recon_maps(ss, 1); },
                    ErrorCode::Invertibility));

  // 4 states but only 3 output samples: the map cannot have full column rank.
  Rng rng(3);
  LinearSS big = random_stable_ss(4, 1, 1, rng);
  CHECK(throws_code([&] { build_recon_maps(big, 3); },
                    ErrorCode::Observability));
}

TEST_CASE("linear model json round-trip") {
  const std::string dir = scratch_dir("lss_json");
  Rng rng(9);
  LinearSS ss = random_stable_ss(3, 2, 1, rng);
  save_linear_ss(ss, dir + "/ss.json");
  LinearSS back = load_linear_ss(dir + "/ss.json");
  CHECK(back.A == ss.A);
  CHECK(back.B == ss.B);
  CHECK(back.C == ss.C);
}

TEST_CASE("n4sid recovers a known system from noiseless data") {
  LinearSS truth;
  truth.A.resize(2, 2);
  truth.A << 0.7, 0.2, -0.1, 0.6;
  truth.B.resize(2, 1);
  truth.B << 1.0, 0.5;
  truth.C.resize(1, 2);
  truth.C << 1.0, -1.0;

  Dataset ds;
  ds.u = generate_white_gaussian(8000, 1.0, 21);
  ds.y = simulate_lss(truth, ds.u, Eigen::VectorXd::Zero(2));

  LinearSS est = n4sid_estimate(ds, 2);

  auto et = sorted_eigs(truth.A);
  auto ee = sorted_eigs(est.A);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(et[i] - ee[i]) < 1e-7);

  // Markov parameters are basis-invariant: C A^k B.
  Eigen::MatrixXd Pt = truth.B, Pe = est.B;
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs((truth.C * Pt)(0, 0) - (est.C * Pe)(0, 0)) < 1e-7);
    Pt = truth.A * Pt;
    Pe = est.A * Pe;
  }
}

TEST_CASE("n4sid guards its preconditions") {
  Dataset ds;
  ds.u = generate_white_gaussian(50, 1.0, 2);
  ds.y = generate_white_gaussian(50, 1.0, 3);
  CHECK(throws_code([&] { n4sid_estimate(ds, 2); },
                    ErrorCode::InvalidArgument));  // record far too short

  Dataset ok;
  ok.u = generate_white_gaussian(4000, 1.0, 4);
  LinearSS sys = scalar_ss(0.5, 1.0, 1.0);
  ok.y = simulate_lss(sys, ok.u, Eigen::VectorXd::Zero(1));
  N4sidOptions opts;
  opts.horizon = 1;  // must exceed the requested order
  CHECK(throws_code([&] { n4sid_estimate(ok, 2, opts); },
                    ErrorCode::InvalidArgument));

  // Asking for order 6 from a rank-1 plant: the projection cannot support it.
  CHECK(throws_code([&] { n4sid_estimate(ok, 6); }, ErrorCode::Order));
}
