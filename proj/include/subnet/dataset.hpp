#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

namespace subnet {

// A finite input/output record. Channels are rows, time runs along columns,
// so u.col(t) / y.col(t) is the sample at time t. u and y always have the
// same number of columns.
struct Dataset {
  Eigen::MatrixXd u;  // n_u x N
  Eigen::MatrixXd y;  // n_y x N
  double sample_rate = 0.0;  // Hz; 0 means unknown

  Eigen::Index n_samples() const { return u.cols(); }
  Eigen::Index n_u() const { return u.rows(); }
  Eigen::Index n_y() const { return y.rows(); }

  // Throws on length mismatch, empty channels, or non-finite entries.
  void validate() const;
};

// CSV with header u_0,...,u_{n_u-1},y_0,...,y_{n_y-1}, one row per sample.
// Values are written with enough digits to round-trip doubles exactly.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Per-channel affine scaling fit on one record and reused on others.
struct Normalizer {
  Eigen::VectorXd mean_u, std_u;  // population statistics
  Eigen::VectorXd mean_y, std_y;
};

// Population std (divide by N). Fails on near-constant channels.
Normalizer fit_normalizer(const Dataset& ds);
Dataset apply_normalizer(const Dataset& ds, const Normalizer& nz);
Dataset invert_normalizer(const Dataset& ds, const Normalizer& nz);

// Contiguous head/middle/tail split. Fractions must sum to 1 (1e-9) and
// every segment must receive at least one sample. Boundaries are
// llround(N*f1) and llround(N*(f1+f2)) so exact fractions split exactly.
std::array<Dataset, 3> split_dataset(const Dataset& ds, double f_train,
                                     double f_val, double f_test);

// Zero-mean white Gaussian with the given per-channel std.
Eigen::MatrixXd generate_white_gaussian(Eigen::Index n_samples, double std_dev,
                                        std::uint64_t seed,
                                        Eigen::Index n_channels = 1);

}  // namespace subnet
