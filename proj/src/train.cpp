#include "subnet/train.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "io_util.hpp"
#include "subnet/adam.hpp"
#include "subnet/errors.hpp"
#include "subnet/eval.hpp"
#include "subnet/loss.hpp"
#include "subnet/rng.hpp"

namespace subnet {

namespace {

// Free-run NRMS on an already-normalized record: encode once on the first
// lag() samples, simulate the rest. Returns +inf when the simulation leaves
// the finite range (the caller records the epoch as unusable).
double validation_nrms(const SubnetModel& m, const Dataset& ds) {
  const Eigen::Index N = ds.n_samples(), lag = m.lag();
  Eigen::VectorXd x = encode(m, stack_u_window(ds.u, lag, m.n_b),
                             stack_y_window(ds.y, lag, m.n_a));
  Eigen::MatrixXd y_hat(m.n_y, N - lag);
  Eigen::VectorXd xu(m.n_x + m.n_u);
  for (Eigen::Index t = lag; t < N; ++t) {
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    y_hat.col(t - lag) = m.C * x + mlp_forward(m.h_net, x);
    xu << x, ds.u.col(t);
    x = m.A * x + m.B * ds.u.col(t) + mlp_forward(m.f_net, xu);
  }
  if (!y_hat.allFinite()) return std::numeric_limits<double>::infinity();
  return nrms(y_hat, ds.y.rightCols(N - lag));
}

}  // namespace

TrainResult train(const SubnetModel& model, const Dataset& train_norm,
                  const Dataset& val_norm, const TrainConfig& cfg,
                  const ProgressFn& progress) {
  model.validate();
  train_norm.validate();
  val_norm.validate();
  if (cfg.T < 1 || cfg.batch_size < 1 || cfg.epochs < 1)
    fail(ErrorCode::InvalidArgument, "train: T, batch_size and epochs must be >= 1");
  if (cfg.lr < 0) fail(ErrorCode::InvalidArgument, "train: negative learning rate");
  if (val_norm.n_samples() < model.lag() + 1)
    fail(ErrorCode::InvalidArgument, "train: validation record shorter than lag+1");

  const std::vector<Eigen::Index> starts =
      valid_starts(train_norm.n_samples(), cfg.T, model.n_a, model.n_b);
  if (starts.empty())
    fail(ErrorCode::InvalidArgument,
         "train: training record has no valid sections for T=" +
             std::to_string(cfg.T));

  SubnetModel wm = model;
  Eigen::VectorXd theta = flatten_params(wm);
  AdamState adam = adam_init(theta.size(), cfg.lr);
  Rng shuffle_rng(derive_seed(cfg.seed, 0x7ea1));

  TrainHistory history;
  Eigen::VectorXd best_theta = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  Eigen::Index best_epoch = 0;

  std::vector<Eigen::Index> order = starts;
  Eigen::VectorXd grad(theta.size());
  for (Eigen::Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    Eigen::Index n_batches = 0;
    for (std::size_t off = 0; off < order.size(); off += cfg.batch_size) {
      const std::size_t len =
          std::min<std::size_t>(cfg.batch_size, order.size() - off);
      const std::vector<Eigen::Index> batch(order.begin() + off,
                                            order.begin() + off + len);
      const double loss = batch_loss_gradient(wm, train_norm, batch, cfg.T, grad);
      if (!std::isfinite(loss) || loss > 1e12)
        fail(ErrorCode::Divergence,
             "train: loss diverged at epoch " + std::to_string(epoch) +
                 ", batch " + std::to_string(n_batches) + " (loss=" +
                 std::to_string(loss) + ")");
      adam_step(theta, grad, adam);
      set_params(wm, theta);
      loss_sum += loss;
      ++n_batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n_batches);
    rec.val_nrms = validation_nrms(wm, val_norm);
    rec.val_loss = rec.val_nrms * rec.val_nrms;
    history.records.push_back(rec);

    if (rec.val_loss < best_loss) {
      best_loss = rec.val_loss;
      best_epoch = epoch;
      best_theta = theta;
    } else if (best_epoch == 0) {
      // Keeps a snapshot even if every validation so far is non-finite.
      best_epoch = epoch;
      best_theta = theta;
    }
    if (progress) progress(rec);
  }

  history.best_epoch = best_epoch;
  TrainResult result;
  result.best_model = std::move(wm);
  set_params(result.best_model, best_theta);
  result.history = std::move(history);
  return result;
}

void save_history_csv(const TrainHistory& h, const std::string& path) {
  auto f = detail::open_out(path);
  f << "epoch,train_loss,val_loss,val_nrms,is_best\n";
  for (const auto& r : h.records)
    f << r.epoch << ',' << detail::fmt_double(r.train_loss) << ','
      << detail::fmt_double(r.val_loss) << ',' << detail::fmt_double(r.val_nrms)
      << ',' << (r.epoch == h.best_epoch ? 1 : 0) << '\n';
  if (!f) fail(ErrorCode::Io, "write failed: " + path);
}

}  // namespace subnet
