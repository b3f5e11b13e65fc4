#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subnet/dataset.hpp"
#include "subnet/model.hpp"

namespace subnet {

struct TrainConfig {
  Eigen::Index T = 50;          // rollout length per section
  Eigen::Index batch_size = 256;
  double lr = 1e-3;
  Eigen::Index epochs = 100;
  std::uint64_t seed = 0;       // drives the per-epoch shuffles
  InitScheme scheme = InitScheme::RanDyRanEnc;  // recorded, not applied here
};

struct EpochRecord {
  Eigen::Index epoch = 0;   // 1-based
  double train_loss = 0.0;  // mean of the epoch's batch losses
  double val_loss = 0.0;    // squared validation NRMS
  double val_nrms = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  Eigen::Index best_epoch = 0;  // earliest epoch with minimal val_loss
};

struct TrainResult {
  SubnetModel best_model;
  TrainHistory history;
};

using ProgressFn = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on the truncated simulation loss. Expects datasets already
// normalized with the training normalizer. Per epoch: seeded shuffle of all
// valid section starts, batches of batch_size (last one short), one Adam
// step each; then a full encoder-initialized simulation of the validation
// record for val_nrms. The returned model is the epoch snapshot with the
// lowest validation loss (ties -> earliest). A non-finite training loss
// aborts with Divergence naming epoch and batch; a non-finite validation
// simulation records val_nrms = inf for that epoch and training continues.
TrainResult train(const SubnetModel& model, const Dataset& train_norm,
                  const Dataset& val_norm, const TrainConfig& cfg,
                  const ProgressFn& progress = {});

// CSV: epoch,train_loss,val_loss,val_nrms,is_best (exactly one is_best=1).
void save_history_csv(const TrainHistory& h, const std::string& path);

}  // namespace subnet
