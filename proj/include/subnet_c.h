/* C interface to the subnet-id library.
 *
 * Conventions:
 *   - every fallible function returns snt_status; SNT_OK is 0
 *   - on failure, snt_last_error() returns a message for the calling thread
 *   - objects are opaque handles created into an out-parameter and released
 *     with the matching *_free function (free functions accept NULL)
 */
#ifndef SUBNET_C_H
#define SUBNET_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum snt_status {
  SNT_OK = 0,
  SNT_ERR_IO = 1,
  SNT_ERR_SCHEMA = 2,
  SNT_ERR_PARSE = 3,
  SNT_ERR_INVALID_ARG = 4,
  SNT_ERR_DEGENERATE_DATA = 5,
  SNT_ERR_STABILITY = 6,
  SNT_ERR_IDENTIFIABILITY = 7,
  SNT_ERR_ORDER = 8,
  SNT_ERR_INVERTIBILITY = 9,
  SNT_ERR_OBSERVABILITY = 10,
  SNT_ERR_DIMENSION = 11,
  SNT_ERR_CONFIG = 12,
  SNT_ERR_LAG_MISMATCH = 13,
  SNT_ERR_DIVERGENCE = 14,
  SNT_ERR_CALIBRATION = 15,
  SNT_ERR_NUMERIC = 16,
  SNT_ERR_UNKNOWN = 99
} snt_status;

const char* snt_version(void);
const char* snt_last_error(void);
const char* snt_status_name(snt_status s);

typedef struct snt_dataset snt_dataset;
typedef struct snt_normalizer snt_normalizer;
typedef struct snt_wh_config snt_wh_config;
typedef struct snt_linear_ss snt_linear_ss;
typedef struct snt_model snt_model;
typedef struct snt_history snt_history;

/* ---- datasets (CSV: header u_0,..,u_{nu-1},y_0,..,y_{ny-1}) ---- */

snt_status snt_dataset_load_csv(const char* path, snt_dataset** out);
snt_status snt_dataset_save_csv(const snt_dataset* ds, const char* path);
snt_status snt_dataset_dims(const snt_dataset* ds, int64_t* n_samples,
                            int64_t* n_u, int64_t* n_y);
snt_status snt_dataset_split(const snt_dataset* ds, double f_train,
                             double f_val, double f_test, snt_dataset** train,
                             snt_dataset** val, snt_dataset** test);
void snt_dataset_free(snt_dataset* ds);

/* ---- Wiener-Hammerstein data generator ---- */

snt_status snt_wh_config_default(snt_wh_config** out);
snt_status snt_wh_config_load(const char* path, snt_wh_config** out);
snt_status snt_wh_config_save(const snt_wh_config* cfg, const char* path);
snt_status snt_wh_config_set_input_std(snt_wh_config* cfg, double input_std);
snt_status snt_wh_config_get_input_std(const snt_wh_config* cfg, double* out);
void snt_wh_config_free(snt_wh_config* cfg);

/* Bisection on the input std until the record's nonlinearity level
 * (100 * NRMS of a fitted linear model) reaches target_nl within tolerance.
 * target_nl must lie in [0.5, 60]. */
snt_status snt_wh_calibrate(const snt_wh_config* cfg, double target_nl,
                            int64_t bla_order, uint64_t seed, double* out_std,
                            double* out_achieved);
snt_status snt_wh_generate(const snt_wh_config* cfg, int64_t n_samples,
                           uint64_t seed, double noise_std, snt_dataset** out);
/* horizon 0 selects the default (4 * bla_order). */
snt_status snt_measure_nl_level(const snt_dataset* ds, int64_t bla_order,
                                int64_t horizon, double* out_level);

/* ---- normalization ---- */

snt_status snt_normalizer_fit(const snt_dataset* ds, snt_normalizer** out);
snt_status snt_normalizer_apply(const snt_normalizer* nz, const snt_dataset* ds,
                                snt_dataset** out);
void snt_normalizer_free(snt_normalizer* nz);

/* ---- linear identification ---- */

/* ds must be normalized; horizon 0 selects 4 * n_x. */
snt_status snt_bla_fit(const snt_dataset* ds_norm, int64_t n_x, int64_t horizon,
                       snt_linear_ss** out);
snt_status snt_lss_load(const char* path, snt_linear_ss** out);
snt_status snt_lss_save(const snt_linear_ss* ss, const char* path);
/* Simulates from a zero state on the normalized record, scores after `skip`
 * samples. Optional report JSON / per-sample CSV paths (NULL to skip).
 * out_nrms/out_percent_nl may be NULL. */
snt_status snt_lss_eval(const snt_linear_ss* ss, const snt_dataset* ds_raw,
                        const snt_normalizer* nz, int64_t skip,
                        const char* report_json_path,
                        const char* errors_csv_path, double* out_nrms,
                        double* out_percent_nl);
void snt_lss_free(snt_linear_ss* ss);

/* ---- SUBNET models ---- */

snt_status snt_model_new(int64_t n_x, int64_t n_u, int64_t n_y, int64_t n_a,
                         int64_t n_b, const int64_t* hidden_dims,
                         int64_t n_hidden, uint64_t seed, snt_model** out);
/* scheme: "RanDY+RanENC", "LinDY+RanENC" or "LinDY+LinENC". The Lin*
 * schemes need bla; LinDY+LinENC builds the reconstructability maps with
 * window n_a (n_a must equal n_b). */
snt_status snt_model_apply_init(snt_model* model, const char* scheme,
                                const snt_linear_ss* bla);
snt_status snt_model_set_normalizer(snt_model* model, const snt_normalizer* nz);
snt_status snt_model_load(const char* path, snt_model** out);
snt_status snt_model_save(const snt_model* model, const char* path);
/* Encoder-initialized free-run on a raw record; scores samples lag()..N-1.
 * Optional report JSON / per-sample CSV outputs; out_nrms may be NULL. */
snt_status snt_model_eval(const snt_model* model, const snt_dataset* ds_raw,
                          const char* report_json_path,
                          const char* errors_csv_path, double* out_nrms);
void snt_model_free(snt_model* model);

/* ---- training ---- */

typedef struct snt_train_config {
  int64_t T;
  int64_t batch_size;
  double lr;
  int64_t epochs;
  uint64_t seed;
} snt_train_config;

typedef struct snt_epoch_record {
  int64_t epoch; /* 1-based */
  double train_loss;
  double val_loss;
  double val_nrms;
  int is_best;
} snt_epoch_record;

/* Called after each epoch; is_best is 0 during training (the best epoch is
 * only known at the end). */
typedef void (*snt_progress_fn)(const snt_epoch_record* rec, void* user);

/* Datasets must be normalized with the training normalizer. The input model
 * is not modified; *out_best receives the snapshot with the lowest
 * validation loss. Either out parameter may be NULL if not wanted. */
snt_status snt_train(const snt_model* model, const snt_dataset* train_norm,
                     const snt_dataset* val_norm, const snt_train_config* cfg,
                     snt_progress_fn progress, void* user, snt_model** out_best,
                     snt_history** out_history);

snt_status snt_history_size(const snt_history* h, int64_t* out);
snt_status snt_history_row(const snt_history* h, int64_t i,
                           snt_epoch_record* out);
snt_status snt_history_best_epoch(const snt_history* h, int64_t* out);
/* CSV: epoch,train_loss,val_loss,val_nrms,is_best */
snt_status snt_history_save_csv(const snt_history* h, const char* path);
void snt_history_free(snt_history* h);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SUBNET_C_H */
