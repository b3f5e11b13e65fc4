#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>

#include "doctest.h"
#include "subnet/dataset.hpp"
#include "test_util.hpp"

using namespace subnet;

namespace {

Dataset tiny_dataset() {
  Dataset ds;
  ds.u.resize(1, 4);
  ds.u << 1.0 / 3.0, -2.5, 1e-17, 4.0;
  ds.y.resize(1, 4);
  ds.y << 0.1, 0.2, -0.3, 1234.5678901234567;
  return ds;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

TEST_CASE("csv round-trip is exact") {
  const std::string dir = scratch_dir("data_roundtrip");
  Dataset ds = tiny_dataset();
  save_dataset(ds, dir + "/a.csv");
  Dataset back = load_dataset(dir + "/a.csv");
  REQUIRE(back.n_samples() == 4);
  CHECK(back.u == ds.u);  // bitwise: the writer picks round-trippable digits
  CHECK(back.y == ds.y);
}

TEST_CASE("csv loader accepts any column order") {
  const std::string dir = scratch_dir("data_order");
  write_file(dir + "/b.csv", "y_0,u_1,u_0\n10,2,1\n20,4,3\n");
  Dataset ds = load_dataset(dir + "/b.csv");
  REQUIRE(ds.n_u() == 2);
  REQUIRE(ds.n_y() == 1);
  CHECK(ds.u(0, 0) == 1.0);
  CHECK(ds.u(1, 0) == 2.0);
  CHECK(ds.u(0, 1) == 3.0);
  CHECK(ds.y(0, 1) == 20.0);
}

TEST_CASE("csv loader rejects malformed input") {
  const std::string dir = scratch_dir("data_bad");
  auto expect = [&](const char* text, ErrorCode code) {
    write_file(dir + "/bad.csv", text);
    CHECK(throws_code([&] { load_dataset(dir + "/bad.csv"); }, code));
  };
  expect("u_0,u_0,y_0\n1,2,3\n", ErrorCode::Schema);        // duplicate
  expect("u_0,noise\n1,2\n", ErrorCode::Schema);            // unknown column
  expect("u_0,y_1\n1,2\n", ErrorCode::Schema);              // y_0 missing
  expect("u_0\n1\n", ErrorCode::Schema);                    // no outputs
  expect("u_0,y_0\n", ErrorCode::Schema);                   // no data rows
  expect("u_0,y_0\n1,2\n3\n", ErrorCode::Schema);           // ragged row
  expect("u_0,y_0\n1,abc\n", ErrorCode::Parse);             // non-numeric
  CHECK(throws_code([&] { load_dataset(dir + "/absent.csv"); }, ErrorCode::Io));
}

TEST_CASE("normalizer uses population statistics") {
  Dataset ds;
  ds.u.resize(1, 4);
  ds.u << 1, 2, 3, 4;  // mean 2.5, population var 1.25
  ds.y.resize(1, 4);
  ds.y << 0, 10, 0, 10;  // mean 5, population std 5
  Normalizer nz = fit_normalizer(ds);
  CHECK(nz.mean_u(0) == doctest::Approx(2.5));
  CHECK(nz.std_u(0) == doctest::Approx(std::sqrt(1.25)));
  CHECK(nz.mean_y(0) == doctest::Approx(5.0));
  CHECK(nz.std_y(0) == doctest::Approx(5.0));

  Dataset n = apply_normalizer(ds, nz);
  CHECK(n.u.row(0).mean() == doctest::Approx(0.0));
  CHECK(std::sqrt(n.y.row(0).array().square().mean()) == doctest::Approx(1.0));

  Dataset back = invert_normalizer(n, nz);
  CHECK((back.u - ds.u).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((back.y - ds.y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalizer rejects near-constant channels") {
  Dataset ds;
  ds.u = Eigen::MatrixXd::Constant(1, 100, 3.0);
  ds.y = Eigen::MatrixXd::Random(1, 100);
  CHECK(throws_code([&] { fit_normalizer(ds); }, ErrorCode::DegenerateData));
}

TEST_CASE("split is contiguous and exact on exact fractions") {
  Dataset ds;
  ds.u.resize(1, 10);
  ds.y.resize(1, 10);
  for (int t = 0; t < 10; ++t) {
    ds.u(0, t) = t;
    ds.y(0, t) = 10 + t;
  }
  auto [tr, va, te] = split_dataset(ds, 0.6, 0.2, 0.2);
  REQUIRE(tr.n_samples() == 6);
  REQUIRE(va.n_samples() == 2);
  REQUIRE(te.n_samples() == 2);
  CHECK(tr.u(0, 0) == 0.0);
  CHECK(va.u(0, 0) == 6.0);  // picks up right where train ends
  CHECK(te.u(0, 1) == 9.0);

  CHECK(throws_code([&] { split_dataset(ds, 0.5, 0.2, 0.2); },
                    ErrorCode::InvalidArgument));
  Dataset two;
  two.u.resize(1, 2);
  two.u << 1, 2;
  two.y = two.u;
  CHECK(throws_code([&] { split_dataset(two, 0.4, 0.3, 0.3); },
                    ErrorCode::InvalidArgument));  // some segment gets 0
}

TEST_CASE("white gaussian generator is seeded and scales linearly") {
  Eigen::MatrixXd a = generate_white_gaussian(500, 1.0, 42);
  Eigen::MatrixXd b = generate_white_gaussian(500, 1.0, 42);
  Eigen::MatrixXd c = generate_white_gaussian(500, 1.0, 43);
  CHECK(a == b);
  CHECK(a != c);

  Eigen::MatrixXd scaled = generate_white_gaussian(500, 2.5, 42);
  CHECK((scaled - 2.5 * a).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXd big = generate_white_gaussian(200000, 1.0, 7);
  CHECK(std::abs(big.mean()) < 0.01);
  CHECK(std::sqrt(big.array().square().mean()) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("validate rejects inconsistent records") {
  Dataset ds = tiny_dataset();
  ds.y.resize(1, 3);
  ds.y << 1, 2, 3;
  CHECK(throws_code([&] { ds.validate(); }, ErrorCode::Dimension));
  ds = tiny_dataset();
  ds.u(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(throws_code([&] { ds.validate(); }, ErrorCode::InvalidArgument));
}
