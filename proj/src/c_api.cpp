#include "subnet_c.h"

#include <exception>
#include <string>
#include <vector>

#include "subnet/dataset.hpp"
#include "subnet/errors.hpp"
#include "subnet/eval.hpp"
#include "subnet/linear_ss.hpp"
#include "subnet/model.hpp"
#include "subnet/n4sid.hpp"
#include "subnet/train.hpp"
#include "subnet/wh_sim.hpp"

using namespace subnet;

struct snt_dataset { Dataset v; };
struct snt_normalizer { Normalizer v; };
struct snt_wh_config { WhSystemConfig v; };
struct snt_linear_ss { LinearSS v; };
struct snt_model { SubnetModel v; };
struct snt_history { TrainHistory v; };

namespace {

thread_local std::string g_last_error;

snt_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return SNT_ERR_IO;
    case ErrorCode::Schema: return SNT_ERR_SCHEMA;
    case ErrorCode::Parse: return SNT_ERR_PARSE;
    case ErrorCode::InvalidArgument: return SNT_ERR_INVALID_ARG;
    case ErrorCode::DegenerateData: return SNT_ERR_DEGENERATE_DATA;
    case ErrorCode::Stability: return SNT_ERR_STABILITY;
    case ErrorCode::Identifiability: return SNT_ERR_IDENTIFIABILITY;
    case ErrorCode::Order: return SNT_ERR_ORDER;
    case ErrorCode::Invertibility: return SNT_ERR_INVERTIBILITY;
    case ErrorCode::Observability: return SNT_ERR_OBSERVABILITY;
    case ErrorCode::Dimension: return SNT_ERR_DIMENSION;
    case ErrorCode::Config: return SNT_ERR_CONFIG;
    case ErrorCode::LagMismatch: return SNT_ERR_LAG_MISMATCH;
    case ErrorCode::Divergence: return SNT_ERR_DIVERGENCE;
    case ErrorCode::Calibration: return SNT_ERR_CALIBRATION;
    case ErrorCode::Numeric: return SNT_ERR_NUMERIC;
  }
  return SNT_ERR_UNKNOWN;
}

// Runs the body, translating exceptions into status codes.
template <typename Fn>
snt_status guarded(Fn&& fn) {
  try {
    fn();
    return SNT_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SNT_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return SNT_ERR_UNKNOWN;
  }
}

snt_status require(bool cond, const char* msg) {
  if (cond) return SNT_OK;
  g_last_error = msg;
  return SNT_ERR_INVALID_ARG;
}

}  // namespace

extern "C" {

const char* snt_version(void) { return "subnet-id 1.0.0"; }

const char* snt_last_error(void) { return g_last_error.c_str(); }

const char* snt_status_name(snt_status s) {
  switch (s) {
    case SNT_OK: return "ok";
    case SNT_ERR_IO: return "io";
    case SNT_ERR_SCHEMA: return "schema";
    case SNT_ERR_PARSE: return "parse";
    case SNT_ERR_INVALID_ARG: return "invalid_argument";
    case SNT_ERR_DEGENERATE_DATA: return "degenerate_data";
    case SNT_ERR_STABILITY: return "stability";
    case SNT_ERR_IDENTIFIABILITY: return "identifiability";
    case SNT_ERR_ORDER: return "order";
    case SNT_ERR_INVERTIBILITY: return "invertibility";
    case SNT_ERR_OBSERVABILITY: return "observability";
    case SNT_ERR_DIMENSION: return "dimension";
    case SNT_ERR_CONFIG: return "config";
    case SNT_ERR_LAG_MISMATCH: return "lag_mismatch";
    case SNT_ERR_DIVERGENCE: return "divergence";
    case SNT_ERR_CALIBRATION: return "calibration";
    case SNT_ERR_NUMERIC: return "numeric";
    case SNT_ERR_UNKNOWN: break;
  }
  return "unknown";
}

/* ---- datasets ---- */

snt_status snt_dataset_load_csv(const char* path, snt_dataset** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new snt_dataset{load_dataset(path)}; });
}

snt_status snt_dataset_save_csv(const snt_dataset* ds, const char* path) {
  if (auto s = require(ds && path, "null argument")) return s;
  return guarded([&] { save_dataset(ds->v, path); });
}

snt_status snt_dataset_dims(const snt_dataset* ds, int64_t* n_samples,
                            int64_t* n_u, int64_t* n_y) {
  if (auto s = require(ds != nullptr, "null dataset")) return s;
  if (n_samples) *n_samples = ds->v.n_samples();
  if (n_u) *n_u = ds->v.n_u();
  if (n_y) *n_y = ds->v.n_y();
  return SNT_OK;
}

snt_status snt_dataset_split(const snt_dataset* ds, double f_train,
                             double f_val, double f_test, snt_dataset** train,
                             snt_dataset** val, snt_dataset** test) {
  if (auto s = require(ds && train && val && test, "null argument")) return s;
  return guarded([&] {
    auto parts = split_dataset(ds->v, f_train, f_val, f_test);
    *train = new snt_dataset{std::move(parts[0])};
    *val = new snt_dataset{std::move(parts[1])};
    *test = new snt_dataset{std::move(parts[2])};
  });
}

void snt_dataset_free(snt_dataset* ds) { delete ds; }

/* ---- WH generator ---- */

snt_status snt_wh_config_default(snt_wh_config** out) {
  if (auto s = require(out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new snt_wh_config{default_wh_config()}; });
}

snt_status snt_wh_config_load(const char* path, snt_wh_config** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new snt_wh_config{load_wh_config(path)}; });
}

snt_status snt_wh_config_save(const snt_wh_config* cfg, const char* path) {
  if (auto s = require(cfg && path, "null argument")) return s;
  return guarded([&] { save_wh_config(cfg->v, path); });
}

snt_status snt_wh_config_set_input_std(snt_wh_config* cfg, double input_std) {
  if (auto s = require(cfg != nullptr, "null config")) return s;
  if (auto s = require(input_std > 0, "input std must be positive")) return s;
  cfg->v.input_std = input_std;
  return SNT_OK;
}

snt_status snt_wh_config_get_input_std(const snt_wh_config* cfg, double* out) {
  if (auto s = require(cfg && out, "null argument")) return s;
  *out = cfg->v.input_std;
  return SNT_OK;
}

void snt_wh_config_free(snt_wh_config* cfg) { delete cfg; }

snt_status snt_wh_calibrate(const snt_wh_config* cfg, double target_nl,
                            int64_t bla_order, uint64_t seed, double* out_std,
                            double* out_achieved) {
  if (auto s = require(cfg && out_std, "null argument")) return s;
  return guarded([&] {
    CalibrationOptions opts;
    opts.bla_order = bla_order;
    auto r = calibrate_input_std(cfg->v, target_nl, seed, opts);
    *out_std = r.input_std;
    if (out_achieved) *out_achieved = r.achieved_nl;
  });
}

snt_status snt_wh_generate(const snt_wh_config* cfg, int64_t n_samples,
                           uint64_t seed, double noise_std, snt_dataset** out) {
  if (auto s = require(cfg && out, "null argument")) return s;
  return guarded([&] {
    *out = new snt_dataset{generate_wh_dataset(cfg->v, n_samples, seed, noise_std)};
  });
}

snt_status snt_measure_nl_level(const snt_dataset* ds, int64_t bla_order,
                                int64_t horizon, double* out_level) {
  if (auto s = require(ds && out_level, "null argument")) return s;
  return guarded([&] { *out_level = measure_nl_level(ds->v, bla_order, horizon); });
}

/* ---- normalizer ---- */

snt_status snt_normalizer_fit(const snt_dataset* ds, snt_normalizer** out) {
  if (auto s = require(ds && out, "null argument")) return s;
  return guarded([&] { *out = new snt_normalizer{fit_normalizer(ds->v)}; });
}

snt_status snt_normalizer_apply(const snt_normalizer* nz, const snt_dataset* ds,
                                snt_dataset** out) {
  if (auto s = require(nz && ds && out, "null argument")) return s;
  return guarded([&] { *out = new snt_dataset{apply_normalizer(ds->v, nz->v)}; });
}

void snt_normalizer_free(snt_normalizer* nz) { delete nz; }

/* ---- linear identification ---- */

snt_status snt_bla_fit(const snt_dataset* ds_norm, int64_t n_x, int64_t horizon,
                       snt_linear_ss** out) {
  if (auto s = require(ds_norm && out, "null argument")) return s;
  return guarded([&] {
    N4sidOptions opts;
    opts.horizon = horizon;
    *out = new snt_linear_ss{n4sid_estimate(ds_norm->v, n_x, opts)};
  });
}

snt_status snt_lss_load(const char* path, snt_linear_ss** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new snt_linear_ss{load_linear_ss(path)}; });
}

snt_status snt_lss_save(const snt_linear_ss* ss, const char* path) {
  if (auto s = require(ss && path, "null argument")) return s;
  return guarded([&] { save_linear_ss(ss->v, path); });
}

snt_status snt_lss_eval(const snt_linear_ss* ss, const snt_dataset* ds_raw,
                        const snt_normalizer* nz, int64_t skip,
                        const char* report_json_path,
                        const char* errors_csv_path, double* out_nrms,
                        double* out_percent_nl) {
  if (auto s = require(ss && ds_raw && nz, "null argument")) return s;
  return guarded([&] {
    EvalReport r = evaluate_lss(ss->v, ds_raw->v, nz->v, skip);
    if (report_json_path) save_eval_report(r, report_json_path);
    if (errors_csv_path) save_eval_errors_csv(r, errors_csv_path);
    if (out_nrms) *out_nrms = r.nrms;
    if (out_percent_nl) *out_percent_nl = r.percent_nl.value();
  });
}

void snt_lss_free(snt_linear_ss* ss) { delete ss; }

/* ---- models ---- */

snt_status snt_model_new(int64_t n_x, int64_t n_u, int64_t n_y, int64_t n_a,
                         int64_t n_b, const int64_t* hidden_dims,
                         int64_t n_hidden, uint64_t seed, snt_model** out) {
  if (auto s = require(out && hidden_dims && n_hidden > 0,
                       "need an output pointer and at least one hidden layer"))
    return s;
  return guarded([&] {
    std::vector<Eigen::Index> hidden(hidden_dims, hidden_dims + n_hidden);
    *out = new snt_model{subnet_new(n_x, n_u, n_y, n_a, n_b, hidden, seed)};
  });
}

snt_status snt_model_apply_init(snt_model* model, const char* scheme,
                                const snt_linear_ss* bla) {
  if (auto s = require(model && scheme, "null argument")) return s;
  return guarded([&] {
    const InitScheme sc = parse_scheme(scheme);
    const LinearSS* lin = bla ? &bla->v : nullptr;
    if (sc == InitScheme::LinDyLinEnc) {
      if (!lin) fail(ErrorCode::Config, "LinDY+LinENC needs a linear estimate");
      if (model->v.n_a != model->v.n_b)
        fail(ErrorCode::LagMismatch,
             "LinDY+LinENC via the C API needs n_a == n_b");
      const ReconMaps maps = build_recon_maps(*lin, model->v.n_a);
      model->v = apply_init_scheme(model->v, sc, lin, &maps);
    } else {
      model->v = apply_init_scheme(model->v, sc, lin, nullptr);
    }
  });
}

snt_status snt_model_set_normalizer(snt_model* model, const snt_normalizer* nz) {
  if (auto s = require(model && nz, "null argument")) return s;
  model->v.normalizer = nz->v;
  return SNT_OK;
}

snt_status snt_model_load(const char* path, snt_model** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new snt_model{load_model(path)}; });
}

snt_status snt_model_save(const snt_model* model, const char* path) {
  if (auto s = require(model && path, "null argument")) return s;
  return guarded([&] { save_model(model->v, path); });
}

snt_status snt_model_eval(const snt_model* model, const snt_dataset* ds_raw,
                          const char* report_json_path,
                          const char* errors_csv_path, double* out_nrms) {
  if (auto s = require(model && ds_raw, "null argument")) return s;
  return guarded([&] {
    EvalReport r = evaluate_model(model->v, ds_raw->v);
    if (report_json_path) save_eval_report(r, report_json_path);
    if (errors_csv_path) save_eval_errors_csv(r, errors_csv_path);
    if (out_nrms) *out_nrms = r.nrms;
  });
}

void snt_model_free(snt_model* model) { delete model; }

/* ---- training ---- */

snt_status snt_train(const snt_model* model, const snt_dataset* train_norm,
                     const snt_dataset* val_norm, const snt_train_config* cfg,
                     snt_progress_fn progress, void* user, snt_model** out_best,
                     snt_history** out_history) {
  if (auto s = require(model && train_norm && val_norm && cfg, "null argument"))
    return s;
  return guarded([&] {
    TrainConfig tc;
    tc.T = cfg->T;
    tc.batch_size = cfg->batch_size;
    tc.lr = cfg->lr;
    tc.epochs = cfg->epochs;
    tc.seed = cfg->seed;
    ProgressFn cb;
    if (progress)
      cb = [progress, user](const EpochRecord& r) {
        snt_epoch_record rec{r.epoch, r.train_loss, r.val_loss, r.val_nrms, 0};
        progress(&rec, user);
      };
    TrainResult res = train(model->v, train_norm->v, val_norm->v, tc, cb);
    if (out_best) *out_best = new snt_model{std::move(res.best_model)};
    if (out_history) *out_history = new snt_history{std::move(res.history)};
  });
}

snt_status snt_history_size(const snt_history* h, int64_t* out) {
  if (auto s = require(h && out, "null argument")) return s;
  *out = static_cast<int64_t>(h->v.records.size());
  return SNT_OK;
}

snt_status snt_history_row(const snt_history* h, int64_t i,
                           snt_epoch_record* out) {
  if (auto s = require(h && out, "null argument")) return s;
  if (i < 0 || i >= static_cast<int64_t>(h->v.records.size())) {
    g_last_error = "history row index out of range";
    return SNT_ERR_INVALID_ARG;
  }
  const auto& r = h->v.records[static_cast<std::size_t>(i)];
  *out = {r.epoch, r.train_loss, r.val_loss, r.val_nrms,
          r.epoch == h->v.best_epoch ? 1 : 0};
  return SNT_OK;
}

snt_status snt_history_best_epoch(const snt_history* h, int64_t* out) {
  if (auto s = require(h && out, "null argument")) return s;
  *out = h->v.best_epoch;
  return SNT_OK;
}

snt_status snt_history_save_csv(const snt_history* h, const char* path) {
  if (auto s = require(h && path, "null argument")) return s;
  return guarded([&] { save_history_csv(h->v, path); });
}

void snt_history_free(snt_history* h) { delete h; }

} /* extern "C" */
