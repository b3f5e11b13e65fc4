#pragma once

#include <optional>
#include <string>

#include "subnet/dataset.hpp"
#include "subnet/linear_ss.hpp"
#include "subnet/model.hpp"

namespace subnet {

// Root-mean-square error normalized by the population std of y over the
// scored range. Columns of y_hat and y must be aligned. Fails with
// DegenerateData when y has (near) zero variance; for multi-output records
// the std is taken over the pooled deviation of all channels.
double nrms(const Eigen::MatrixXd& y_hat, const Eigen::MatrixXd& y);

// Affine map (1 - nrms_bla) * 100. Warns on stderr (and goes negative) when
// nrms_bla > 1. See eval docs: the experiment pipeline's nonlinearity level
// is a different quantity, 100 * nrms_bla.
double percent_nl(double nrms_bla);

// Encoder-initialized free-run simulation on a raw record: normalizes with
// the model's normalizer (must be present), encodes the state once from the
// first lag() samples, then simulates openly. Returns the denormalized
// outputs for t = lag() .. N-1 (N - lag() columns). Requires at least
// lag()+1 samples; Divergence on non-finite states.
Eigen::MatrixXd simulate_model(const SubnetModel& m, const Dataset& ds_raw);

struct EvalReport {
  double nrms = 0.0;
  std::optional<double> percent_nl;  // only meaningful for linear models
  Eigen::Index n = 0;                // samples skipped before scoring
  Eigen::MatrixXd y_true;            // scored range, denormalized
  Eigen::MatrixXd y_hat;
};

// Simulate + score a SUBNET model on a raw record.
EvalReport evaluate_model(const SubnetModel& m, const Dataset& ds_raw);

// Score a linear model on a raw record: normalize with nz, simulate from
// x0 = 0, skip the first `skip` samples, score the rest. percent_nl is set.
EvalReport evaluate_lss(const LinearSS& ss, const Dataset& ds_raw,
                        const Normalizer& nz, Eigen::Index skip);

// report JSON carries nrms, percent_nl (when set), n and the record length;
// the per-sample CSV has columns t, then per channel y_i, yhat_i, err_i.
void save_eval_report(const EvalReport& r, const std::string& json_path);
void save_eval_errors_csv(const EvalReport& r, const std::string& csv_path);

}  // namespace subnet
