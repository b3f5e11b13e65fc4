#pragma once

#include <vector>

#include "subnet/dataset.hpp"
#include "subnet/model.hpp"

namespace subnet {

// Section starts usable for truncated simulation loss on a record of N
// samples: every s with s >= max(n_a, n_b) and s + T <= N.
std::vector<Eigen::Index> valid_starts(Eigen::Index n_samples, Eigen::Index T,
                                       Eigen::Index n_a, Eigen::Index n_b);

// Truncated multiple-shooting loss over a batch of sections. Each start s
// is encoded from its preceding windows and rolled out T steps; the loss is
//   (1 / (|starts| * T)) * sum_s sum_{k=0..T-1} ||y_hat_{s+k|s} - y_{s+k}||^2.
// Sections are evaluated together as one matrix batch (columns = sections).
double batch_loss(const SubnetModel& m, const Dataset& ds,
                  const std::vector<Eigen::Index>& starts, Eigen::Index T);

// Same forward plus reverse-mode gradient through the unrolled graph
// (encoder -> T state steps -> outputs). grad follows the flat layout of
// flatten_params. Returns the loss.
double batch_loss_gradient(const SubnetModel& m, const Dataset& ds,
                           const std::vector<Eigen::Index>& starts,
                           Eigen::Index T, Eigen::VectorXd& grad);

}  // namespace subnet
