#pragma once

#include <cstdint>
#include <string>

#include "subnet/dataset.hpp"
#include "subnet/linear_ss.hpp"

namespace subnet {

enum class WhNonlinearity { Sine, Identity };

// Wiener-Hammerstein data generator: linear block G1, static nonlinearity g,
// linear block G2, simulated as one 4th-order state-space system
//   x_{t+1} = blkdiag(A1,A2) x_t + [B1;0] u_t + [0;B2] g(C1 x1_t)
//   y_t     = C2 x2_t
// from zero initial state.
struct WhSystemConfig {
  Eigen::Matrix2d A1; Eigen::Vector2d B1; Eigen::RowVector2d C1;
  Eigen::Matrix2d A2; Eigen::Vector2d B2; Eigen::RowVector2d C2;
  WhNonlinearity nonlinearity = WhNonlinearity::Sine;
  double sample_rate = 1000.0;
  double input_std = 1.0;
};

// 2nd-order Butterworth low-pass, discretized by zero-order hold so the
// model stays strictly proper (no feed-through path exists in the WH
// structure). DC gain is exactly 1, poles are exp(s_k / fs).
LinearSS butterworth2_lowpass(double cutoff_hz, double sample_rate_hz);

// G1 cutoff 200 Hz, G2 cutoff 350 Hz, fs = 1000 Hz, sine nonlinearity.
WhSystemConfig default_wh_config();

// Simulates the WH system over u (1 x N). Optional white Gaussian output
// noise, seeded for reproducibility. Fails if either block is not Schur
// stable (any |eig| >= 1).
Dataset simulate_wh(const WhSystemConfig& cfg, const Eigen::MatrixXd& u,
                    double noise_std = 0.0, std::uint64_t noise_seed = 0);

// Convenience: draw a white Gaussian input with cfg.input_std and simulate.
Dataset generate_wh_dataset(const WhSystemConfig& cfg, Eigen::Index n_samples,
                            std::uint64_t seed, double noise_std = 0.0);

// Nonlinearity level of a record: fit a linear model of the given order on
// it (after normalization) and return 100 * NRMS of that model's free-run
// simulation. Near 0 for almost-linear data, grows with distortion.
double measure_nl_level(const Dataset& ds, Eigen::Index bla_order,
                        Eigen::Index horizon = 0, Eigen::Index skip = -1);

struct CalibrationOptions {
  Eigen::Index n_samples = 20000;  // calibration record length
  Eigen::Index bla_order = 4;
  Eigen::Index horizon = 0;      // 0 selects the n4sid default
  double tolerance = 0.5;        // percentage points (contract allows 1.0)
  int max_iterations = 40;
  double std_lo = 0.02;          // bisection bracket on input_std
  double std_hi = 6.0;
};

struct CalibrationResult {
  double input_std = 0.0;
  double achieved_nl = 0.0;
  int iterations = 0;
};

// Finds the input std at which the WH system's nonlinearity level hits
// target_nl (percent), by bisection on a fixed seeded calibration record.
// target_nl must lie in [0.5, 60]. Fails with Calibration (reporting the
// best achieved level) if the bracket excludes the target or the iteration
// cap is reached.
CalibrationResult calibrate_input_std(const WhSystemConfig& cfg,
                                      double target_nl, std::uint64_t seed,
                                      const CalibrationOptions& opts = {});

void save_wh_config(const WhSystemConfig& cfg, const std::string& path);
WhSystemConfig load_wh_config(const std::string& path);

}  // namespace subnet
