// Command-line frontend for the subnet-id library. Talks to the library
// exclusively through the C API in subnet_c.h.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "subnet_c.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- handle RAII ----
struct DsDel { void operator()(snt_dataset* p) const { snt_dataset_free(p); } };
struct NzDel { void operator()(snt_normalizer* p) const { snt_normalizer_free(p); } };
struct WhDel { void operator()(snt_wh_config* p) const { snt_wh_config_free(p); } };
struct SsDel { void operator()(snt_linear_ss* p) const { snt_lss_free(p); } };
struct MdDel { void operator()(snt_model* p) const { snt_model_free(p); } };
struct HiDel { void operator()(snt_history* p) const { snt_history_free(p); } };
using Ds = std::unique_ptr<snt_dataset, DsDel>;
using Nz = std::unique_ptr<snt_normalizer, NzDel>;
using Wh = std::unique_ptr<snt_wh_config, WhDel>;
using Ss = std::unique_ptr<snt_linear_ss, SsDel>;
using Md = std::unique_ptr<snt_model, MdDel>;
using Hi = std::unique_ptr<snt_history, HiDel>;

#define CHECK(call)                                                        \
  do {                                                                     \
    snt_status st__ = (call);                                              \
    if (st__ != SNT_OK) {                                                  \
      std::cerr << "error (" << snt_status_name(st__)                      \
                << "): " << snt_last_error() << "\n";                      \
      return 1;                                                            \
    }                                                                      \
  } while (0)

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// All tunables, with desk-scale defaults. A --config JSON may override any
// of them; explicit flags win over both.
struct Options {
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string wh_config_path;

  // data generation
  double nl_target = 5.0;
  double input_std = 0.0;  // >0 skips calibration
  double noise_std = 0.0;
  std::int64_t n_train = 20000, n_val = 5000, n_test = 5000;

  // linear identification
  std::int64_t bla_order = 4;
  std::int64_t horizon = 0;  // 0 = auto (4 * order)
  std::int64_t skip = 4;     // samples skipped when scoring linear models

  // model
  std::int64_t n_x = 4, n_a = 4, n_b = 4;
  std::vector<std::int64_t> hidden = {32, 32};

  // training. lr is tuned to the desk-scale budget: 100 epochs should end
  // mid-descent, where the initialization still shows, not at saturation.
  std::int64_t T = 50, batch_size = 256, epochs = 100;
  double lr = 1e-4;
  std::string scheme = "LinDY+LinENC";

  // experiment grid
  std::vector<double> nl_targets = {1, 5, 10, 20, 40};
  std::vector<std::string> schemes = {"RanDY+RanENC", "LinDY+RanENC",
                                      "LinDY+LinENC"};
  std::int64_t runs = 3;

  // file inputs
  std::string train_csv, val_csv, test_csv, bla_path, model_path, data_csv;
  std::string report_path, errors_path;
};

template <typename T>
void maybe(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void load_config_file(const std::string& path, Options& o) {
  std::ifstream f(path);
  if (!f) {
    std::cerr << "error (io): cannot open config " << path << "\n";
    std::exit(1);
  }
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    std::cerr << "error (parse): bad config JSON: " << e.what() << "\n";
    std::exit(1);
  }
  maybe(j, "seed", o.seed);
  maybe(j, "out", o.out);
  maybe(j, "wh_config", o.wh_config_path);
  if (j.contains("data")) {
    const json& d = j["data"];
    maybe(d, "nl_target", o.nl_target);
    maybe(d, "input_std", o.input_std);
    maybe(d, "noise_std", o.noise_std);
    maybe(d, "n_train", o.n_train);
    maybe(d, "n_val", o.n_val);
    maybe(d, "n_test", o.n_test);
  }
  if (j.contains("bla")) {
    const json& b = j["bla"];
    maybe(b, "order", o.bla_order);
    maybe(b, "horizon", o.horizon);
    maybe(b, "skip", o.skip);
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    maybe(m, "n_x", o.n_x);
    maybe(m, "n_a", o.n_a);
    maybe(m, "n_b", o.n_b);
    maybe(m, "hidden", o.hidden);
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    maybe(t, "T", o.T);
    maybe(t, "batch_size", o.batch_size);
    maybe(t, "epochs", o.epochs);
    maybe(t, "lr", o.lr);
    maybe(t, "scheme", o.scheme);
  }
  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    maybe(e, "nl_targets", o.nl_targets);
    maybe(e, "schemes", o.schemes);
    maybe(e, "runs", o.runs);
  }
}

json options_to_json(const Options& o) {
  json j;
  j["seed"] = o.seed;
  j["out"] = o.out;
  if (!o.wh_config_path.empty()) j["wh_config"] = o.wh_config_path;
  j["data"] = {{"nl_target", o.nl_target}, {"input_std", o.input_std},
               {"noise_std", o.noise_std}, {"n_train", o.n_train},
               {"n_val", o.n_val},         {"n_test", o.n_test}};
  j["bla"] = {{"order", o.bla_order}, {"horizon", o.horizon}, {"skip", o.skip}};
  j["model"] = {{"n_x", o.n_x}, {"n_a", o.n_a}, {"n_b", o.n_b}, {"hidden", o.hidden}};
  j["train"] = {{"T", o.T},         {"batch_size", o.batch_size},
                {"epochs", o.epochs}, {"lr", o.lr},
                {"scheme", o.scheme}};
  j["experiment"] = {{"nl_targets", o.nl_targets},
                     {"schemes", o.schemes},
                     {"runs", o.runs}};
  return j;
}

int write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  if (!f) {
    std::cerr << "error (io): cannot write " << path << "\n";
    return 1;
  }
  return 0;
}

int ensure_outdir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "error (io): cannot create output dir " << out << ": "
              << ec.message() << "\n";
    return 1;
  }
  return 0;
}

Wh open_wh_config(const Options& o, int& rc) {
  snt_wh_config* cfg = nullptr;
  snt_status st = o.wh_config_path.empty()
                      ? snt_wh_config_default(&cfg)
                      : snt_wh_config_load(o.wh_config_path.c_str(), &cfg);
  if (st != SNT_OK) {
    std::cerr << "error (" << snt_status_name(st) << "): " << snt_last_error()
              << "\n";
    rc = 1;
  }
  return Wh(cfg);
}

// ---- generate ----

int cmd_generate(const Options& o) {
  if (ensure_outdir(o.out)) return 1;
  int rc = 0;
  Wh cfg = open_wh_config(o, rc);
  if (rc) return rc;

  double input_std = o.input_std;
  double cal_achieved = std::nan("");
  if (input_std <= 0) {
    CHECK(snt_wh_calibrate(cfg.get(), o.nl_target, o.bla_order, o.seed + 8000,
                           &input_std, &cal_achieved));
    std::cout << "calibrated input_std=" << fmt_short(input_std)
              << " (level " << fmt_short(cal_achieved) << "% at target "
              << fmt_short(o.nl_target) << "%)\n";
  }
  CHECK(snt_wh_config_set_input_std(cfg.get(), input_std));

  const std::int64_t N = o.n_train + o.n_val + o.n_test;
  snt_dataset* full_raw = nullptr;
  CHECK(snt_wh_generate(cfg.get(), N, o.seed, o.noise_std, &full_raw));
  Ds full(full_raw);

  snt_dataset *tr_raw = nullptr, *va_raw = nullptr, *te_raw = nullptr;
  CHECK(snt_dataset_split(full.get(), double(o.n_train) / double(N),
                          double(o.n_val) / double(N),
                          double(o.n_test) / double(N), &tr_raw, &va_raw,
                          &te_raw));
  Ds tr(tr_raw), va(va_raw), te(te_raw);

  CHECK(snt_dataset_save_csv(tr.get(), (o.out + "/train.csv").c_str()));
  CHECK(snt_dataset_save_csv(va.get(), (o.out + "/val.csv").c_str()));
  CHECK(snt_dataset_save_csv(te.get(), (o.out + "/test.csv").c_str()));
  CHECK(snt_wh_config_save(cfg.get(), (o.out + "/wh_config.json").c_str()));

  double measured = std::nan("");
  CHECK(snt_measure_nl_level(tr.get(), o.bla_order, o.horizon, &measured));

  json manifest;
  manifest["nl_target"] = o.nl_target;
  manifest["input_std"] = input_std;
  if (std::isfinite(cal_achieved)) manifest["calibration_nl"] = cal_achieved;
  manifest["measured_nl_train"] = measured;
  manifest["seed"] = o.seed;
  manifest["noise_std"] = o.noise_std;
  manifest["n_train"] = o.n_train;
  manifest["n_val"] = o.n_val;
  manifest["n_test"] = o.n_test;
  if (write_text(o.out + "/manifest.json", manifest.dump(2) + "\n")) return 1;

  std::cout << "wrote " << o.out << "/{train,val,test}.csv  (" << o.n_train
            << "/" << o.n_val << "/" << o.n_test << " samples, measured level "
            << fmt_short(measured) << "%)\n";
  return 0;
}

// ---- bla ----

int cmd_bla(const Options& o) {
  if (o.train_csv.empty()) {
    std::cerr << "error (config): --train is required\n";
    return 1;
  }
  if (ensure_outdir(o.out)) return 1;

  snt_dataset* tr_raw = nullptr;
  CHECK(snt_dataset_load_csv(o.train_csv.c_str(), &tr_raw));
  Ds tr(tr_raw);
  snt_normalizer* nz_raw = nullptr;
  CHECK(snt_normalizer_fit(tr.get(), &nz_raw));
  Nz nz(nz_raw);
  snt_dataset* trn_raw = nullptr;
  CHECK(snt_normalizer_apply(nz.get(), tr.get(), &trn_raw));
  Ds trn(trn_raw);

  snt_linear_ss* ss_raw = nullptr;
  CHECK(snt_bla_fit(trn.get(), o.bla_order, o.horizon, &ss_raw));
  Ss ss(ss_raw);
  CHECK(snt_lss_save(ss.get(), (o.out + "/bla.json").c_str()));
  std::cout << "wrote " << o.out << "/bla.json (order " << o.bla_order << ")\n";

  if (!o.test_csv.empty()) {
    snt_dataset* te_raw = nullptr;
    CHECK(snt_dataset_load_csv(o.test_csv.c_str(), &te_raw));
    Ds te(te_raw);
    double nrms = 0, pnl = 0;
    CHECK(snt_lss_eval(ss.get(), te.get(), nz.get(), o.skip,
                       (o.out + "/bla_report.json").c_str(),
                       o.errors_path.empty() ? nullptr : o.errors_path.c_str(),
                       &nrms, &pnl));
    std::cout << "test NRMS " << fmt_short(nrms) << "  (nonlinearity level "
              << fmt_short(100.0 * nrms) << "%, percent_nl "
              << fmt_short(pnl) << ")\n";
  }
  return 0;
}

// ---- train ----

struct ProgressCtx {
  std::int64_t every = 1;
};

void print_progress(const snt_epoch_record* r, void* user) {
  const auto* ctx = static_cast<const ProgressCtx*>(user);
  if (r->epoch % ctx->every == 0)
    std::cout << "epoch " << r->epoch << "  train_loss "
              << fmt_short(r->train_loss) << "  val_nrms "
              << fmt_short(r->val_nrms) << "\n";
}

int cmd_train(const Options& o, bool quiet = false) {
  if (o.train_csv.empty() || o.val_csv.empty()) {
    std::cerr << "error (config): --train and --val are required\n";
    return 1;
  }
  const bool lin_scheme = o.scheme != "RanDY+RanENC";
  if (lin_scheme && o.bla_path.empty()) {
    std::cerr << "error (config): scheme " << o.scheme
              << " needs --bla <bla.json>\n";
    return 1;
  }
  if (ensure_outdir(o.out)) return 1;

  snt_dataset* tr_raw = nullptr;
  CHECK(snt_dataset_load_csv(o.train_csv.c_str(), &tr_raw));
  Ds tr(tr_raw);
  snt_dataset* va_raw = nullptr;
  CHECK(snt_dataset_load_csv(o.val_csv.c_str(), &va_raw));
  Ds va(va_raw);

  snt_normalizer* nz_raw = nullptr;
  CHECK(snt_normalizer_fit(tr.get(), &nz_raw));
  Nz nz(nz_raw);
  snt_dataset* trn_raw = nullptr;
  CHECK(snt_normalizer_apply(nz.get(), tr.get(), &trn_raw));
  Ds trn(trn_raw);
  snt_dataset* van_raw = nullptr;
  CHECK(snt_normalizer_apply(nz.get(), va.get(), &van_raw));
  Ds van(van_raw);

  std::int64_t n_samples = 0, n_u = 0, n_y = 0;
  CHECK(snt_dataset_dims(tr.get(), &n_samples, &n_u, &n_y));

  snt_model* model_raw = nullptr;
  CHECK(snt_model_new(o.n_x, n_u, n_y, o.n_a, o.n_b, o.hidden.data(),
                      static_cast<std::int64_t>(o.hidden.size()), o.seed,
                      &model_raw));
  Md model(model_raw);
  CHECK(snt_model_set_normalizer(model.get(), nz.get()));

  Ss bla;
  if (lin_scheme) {
    snt_linear_ss* ss_raw = nullptr;
    CHECK(snt_lss_load(o.bla_path.c_str(), &ss_raw));
    bla.reset(ss_raw);
  }
  CHECK(snt_model_apply_init(model.get(), o.scheme.c_str(), bla.get()));

  snt_train_config tc{o.T, o.batch_size, o.lr, o.epochs, o.seed};
  ProgressCtx ctx{quiet ? std::max<std::int64_t>(1, o.epochs / 5) : 1};
  snt_model* best_raw = nullptr;
  snt_history* hist_raw = nullptr;
  CHECK(snt_train(model.get(), trn.get(), van.get(), &tc, print_progress, &ctx,
                  &best_raw, &hist_raw));
  Md best(best_raw);
  Hi hist(hist_raw);

  CHECK(snt_model_save(best.get(), (o.out + "/model.json").c_str()));
  CHECK(snt_history_save_csv(hist.get(), (o.out + "/history.csv").c_str()));
  std::int64_t best_epoch = 0;
  CHECK(snt_history_best_epoch(hist.get(), &best_epoch));
  std::cout << "best epoch " << best_epoch << "; wrote " << o.out
            << "/model.json, " << o.out << "/history.csv\n";

  if (!o.test_csv.empty()) {
    snt_dataset* te_raw = nullptr;
    CHECK(snt_dataset_load_csv(o.test_csv.c_str(), &te_raw));
    Ds te(te_raw);
    double nrms = 0;
    CHECK(snt_model_eval(best.get(), te.get(),
                         (o.out + "/test_report.json").c_str(), nullptr,
                         &nrms));
    std::cout << "test NRMS " << fmt_short(nrms) << "\n";
  }
  if (write_text(o.out + "/train_config.json", options_to_json(o).dump(2) + "\n"))
    return 1;
  return 0;
}

// ---- evaluate ----

int cmd_evaluate(const Options& o) {
  if (o.model_path.empty() || o.data_csv.empty()) {
    std::cerr << "error (config): --model and --data are required\n";
    return 1;
  }
  snt_model* model_raw = nullptr;
  CHECK(snt_model_load(o.model_path.c_str(), &model_raw));
  Md model(model_raw);
  snt_dataset* ds_raw = nullptr;
  CHECK(snt_dataset_load_csv(o.data_csv.c_str(), &ds_raw));
  Ds ds(ds_raw);

  const std::string report =
      o.report_path.empty() ? (o.out + "/eval_report.json") : o.report_path;
  if (o.report_path.empty() && ensure_outdir(o.out)) return 1;
  double nrms = 0;
  CHECK(snt_model_eval(model.get(), ds.get(), report.c_str(),
                       o.errors_path.empty() ? nullptr : o.errors_path.c_str(),
                       &nrms));
  std::cout << "NRMS " << fmt_short(nrms) << "  (report " << report << ")\n";
  return 0;
}

// ---- experiment ----

struct CellResult {
  double nl_target = 0, nl_achieved = 0;
  std::string scheme;
  std::uint64_t seed = 0;
  double test_nrms = std::nan("");
  std::int64_t best_epoch = 0;
  std::string status = "ok";
};

void write_summary(const std::string& path, const std::vector<CellResult>& cells) {
  std::ofstream f(path);
  f << "nl_target,nl_achieved,scheme,seed,test_nrms,best_epoch,status\n";
  for (const auto& c : cells)
    f << fmt_short(c.nl_target) << ',' << fmt17(c.nl_achieved) << ','
      << c.scheme << ',' << c.seed << ',' << fmt17(c.test_nrms) << ','
      << c.best_epoch << ',' << c.status << '\n';
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_medians(const std::string& path, const Options& o,
                   const std::vector<CellResult>& cells) {
  std::ofstream f(path);
  f << "nl_target,scheme,median_test_nrms,n_ok\n";
  for (double nl : o.nl_targets)
    for (const auto& scheme : o.schemes) {
      std::vector<double> vals;
      for (const auto& c : cells)
        if (c.nl_target == nl && c.scheme == scheme && c.status == "ok")
          vals.push_back(c.test_nrms);
      f << fmt_short(nl) << ',' << scheme << ',' << fmt17(median(vals)) << ','
        << vals.size() << '\n';
    }
}

// One training cell; returns a row for summary.csv. Failures are recorded,
// not fatal.
CellResult run_cell(const Options& o, const std::string& prefix, double nl,
                    double nl_achieved, const std::string& scheme,
                    std::uint64_t run_seed, const snt_dataset* trn,
                    const snt_dataset* van, const snt_dataset* te_raw,
                    const snt_normalizer* nz, const snt_linear_ss* bla,
                    std::int64_t n_u, std::int64_t n_y) {
  CellResult cell;
  cell.nl_target = nl;
  cell.nl_achieved = nl_achieved;
  cell.scheme = scheme;
  cell.seed = run_seed;

  auto fail_with = [&](snt_status st) {
    cell.status = std::string("error:") + snt_status_name(st);
    std::cerr << "cell " << prefix << " failed (" << snt_status_name(st)
              << "): " << snt_last_error() << "\n";
    return cell;
  };

  snt_model* model_raw = nullptr;
  snt_status st = snt_model_new(o.n_x, n_u, n_y, o.n_a, o.n_b, o.hidden.data(),
                                static_cast<std::int64_t>(o.hidden.size()),
                                run_seed, &model_raw);
  if (st != SNT_OK) return fail_with(st);
  Md model(model_raw);
  if ((st = snt_model_set_normalizer(model.get(), nz)) != SNT_OK)
    return fail_with(st);
  if ((st = snt_model_apply_init(model.get(), scheme.c_str(),
                                 scheme == "RanDY+RanENC" ? nullptr : bla)) !=
      SNT_OK)
    return fail_with(st);

  snt_train_config tc{o.T, o.batch_size, o.lr, o.epochs, run_seed};
  ProgressCtx ctx{std::max<std::int64_t>(1, o.epochs / 4)};
  snt_model* best_raw = nullptr;
  snt_history* hist_raw = nullptr;
  if ((st = snt_train(model.get(), trn, van, &tc, print_progress, &ctx,
                      &best_raw, &hist_raw)) != SNT_OK)
    return fail_with(st);
  Md best(best_raw);
  Hi hist(hist_raw);

  if ((st = snt_model_save(best.get(), (prefix + "_model.json").c_str())) !=
      SNT_OK)
    return fail_with(st);
  if ((st = snt_history_save_csv(hist.get(), (prefix + "_history.csv").c_str())) !=
      SNT_OK)
    return fail_with(st);
  snt_history_best_epoch(hist.get(), &cell.best_epoch);

  double nrms = 0;
  if ((st = snt_model_eval(best.get(), te_raw, (prefix + "_report.json").c_str(),
                           nullptr, &nrms)) != SNT_OK)
    return fail_with(st);
  cell.test_nrms = nrms;
  std::cout << prefix << ": test NRMS " << fmt_short(nrms) << " (best epoch "
            << cell.best_epoch << ")\n";
  return cell;
}

int cmd_experiment(const Options& o) {
  if (ensure_outdir(o.out)) return 1;
  if (write_text(o.out + "/resolved_config.json",
                 options_to_json(o).dump(2) + "\n"))
    return 1;

  std::vector<CellResult> cells;
  bool all_ok = true;

  for (std::size_t li = 0; li < o.nl_targets.size(); ++li) {
    const double nl = o.nl_targets[li];
    const std::string lvl = o.out + "/nl" + fmt_short(nl);
    int rc = 0;
    Wh cfg = open_wh_config(o, rc);
    if (rc) return rc;

    // Shared per-level data pipeline. A failure here poisons every cell of
    // the level but the grid keeps going.
    auto level_error = [&](snt_status st) {
      std::cerr << "level nl=" << fmt_short(nl) << " failed ("
                << snt_status_name(st) << "): " << snt_last_error() << "\n";
      for (const auto& scheme : o.schemes)
        for (std::int64_t r = 0; r < o.runs; ++r) {
          CellResult c;
          c.nl_target = nl;
          c.nl_achieved = std::nan("");
          c.scheme = scheme;
          c.seed = o.seed + static_cast<std::uint64_t>(r);
          c.status = std::string("error:") + snt_status_name(st);
          cells.push_back(c);
        }
      all_ok = false;
    };

    double input_std = o.input_std, cal_nl = std::nan("");
    snt_status st = SNT_OK;
    if (input_std <= 0 &&
        (st = snt_wh_calibrate(cfg.get(), nl, o.bla_order,
                               o.seed + 8000 + li, &input_std, &cal_nl)) !=
            SNT_OK) {
      level_error(st);
      continue;
    }
    snt_wh_config_set_input_std(cfg.get(), input_std);
    std::cout << "nl=" << fmt_short(nl) << ": input_std "
              << fmt_short(input_std) << "\n";

    const std::int64_t N = o.n_train + o.n_val + o.n_test;
    snt_dataset* full_raw = nullptr;
    if ((st = snt_wh_generate(cfg.get(), N, o.seed + 9000 + li, o.noise_std,
                              &full_raw)) != SNT_OK) {
      level_error(st);
      continue;
    }
    Ds full(full_raw);
    snt_dataset *tr_raw = nullptr, *va_raw = nullptr, *te_raw = nullptr;
    if ((st = snt_dataset_split(full.get(), double(o.n_train) / double(N),
                                double(o.n_val) / double(N),
                                double(o.n_test) / double(N), &tr_raw, &va_raw,
                                &te_raw)) != SNT_OK) {
      level_error(st);
      continue;
    }
    Ds tr(tr_raw), va(va_raw), te(te_raw);

    snt_dataset_save_csv(tr.get(), (lvl + "_train.csv").c_str());
    snt_dataset_save_csv(va.get(), (lvl + "_val.csv").c_str());
    snt_dataset_save_csv(te.get(), (lvl + "_test.csv").c_str());
    snt_wh_config_save(cfg.get(), (lvl + "_wh_config.json").c_str());

    snt_normalizer* nz_raw = nullptr;
    if ((st = snt_normalizer_fit(tr.get(), &nz_raw)) != SNT_OK) {
      level_error(st);
      continue;
    }
    Nz nz(nz_raw);
    snt_dataset* trn_raw = nullptr;
    if ((st = snt_normalizer_apply(nz.get(), tr.get(), &trn_raw)) != SNT_OK) {
      level_error(st);
      continue;
    }
    Ds trn(trn_raw);
    snt_dataset* van_raw = nullptr;
    if ((st = snt_normalizer_apply(nz.get(), va.get(), &van_raw)) != SNT_OK) {
      level_error(st);
      continue;
    }
    Ds van(van_raw);

    snt_linear_ss* ss_raw = nullptr;
    if ((st = snt_bla_fit(trn.get(), o.bla_order, o.horizon, &ss_raw)) !=
        SNT_OK) {
      level_error(st);
      continue;
    }
    Ss bla(ss_raw);
    snt_lss_save(bla.get(), (lvl + "_bla.json").c_str());

    double bla_val_nrms = 0, bla_test_nrms = 0, pnl = 0;
    if ((st = snt_lss_eval(bla.get(), va.get(), nz.get(), o.skip,
                           (lvl + "_bla_val_report.json").c_str(), nullptr,
                           &bla_val_nrms, &pnl)) != SNT_OK ||
        (st = snt_lss_eval(bla.get(), te.get(), nz.get(), o.skip,
                           (lvl + "_bla_test_report.json").c_str(), nullptr,
                           &bla_test_nrms, &pnl)) != SNT_OK) {
      level_error(st);
      continue;
    }
    const double nl_achieved = 100.0 * bla_test_nrms;
    std::cout << "nl=" << fmt_short(nl) << ": achieved level "
              << fmt_short(nl_achieved) << "%, BLA val NRMS "
              << fmt_short(bla_val_nrms) << "\n";

    json manifest;
    manifest["nl_target"] = nl;
    manifest["input_std"] = input_std;
    if (std::isfinite(cal_nl)) manifest["calibration_nl"] = cal_nl;
    manifest["nl_achieved"] = nl_achieved;
    manifest["bla_val_nrms"] = bla_val_nrms;
    manifest["bla_test_nrms"] = bla_test_nrms;
    manifest["seed"] = o.seed;
    manifest["n_train"] = o.n_train;
    manifest["n_val"] = o.n_val;
    manifest["n_test"] = o.n_test;
    write_text(lvl + "_manifest.json", manifest.dump(2) + "\n");

    std::int64_t n_samples = 0, n_u = 0, n_y = 0;
    snt_dataset_dims(tr.get(), &n_samples, &n_u, &n_y);

    for (const auto& scheme : o.schemes)
      for (std::int64_t r = 0; r < o.runs; ++r) {
        const std::uint64_t run_seed = o.seed + static_cast<std::uint64_t>(r);
        const std::string prefix =
            lvl + "_scheme" + scheme + "_run" + std::to_string(run_seed);
        std::cout << "--- " << prefix << " ---\n";
        CellResult cell =
            run_cell(o, prefix, nl, nl_achieved, scheme, run_seed, trn.get(),
                     van.get(), te.get(), nz.get(), bla.get(), n_u, n_y);
        if (cell.status != "ok") all_ok = false;
        cells.push_back(std::move(cell));
      }
  }

  write_summary(o.out + "/summary.csv", cells);
  write_medians(o.out + "/medians.csv", o, cells);
  std::cout << "wrote " << o.out << "/summary.csv and medians.csv\n";
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  // --config is applied before the flag values so explicit flags win.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") load_config_file(argv[i + 1], o);

  CLI::App app{"Nonlinear state-space identification with subspace-encoder "
               "networks and linear (BLA) initialization"};
  app.require_subcommand(1);
  std::string config_path;  // consumed above; registered so parsing accepts it

  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", config_path, "JSON config file");
    c->add_option("--seed", o.seed, "base seed");
    c->add_option("--out", o.out, "output directory");
  };

  CLI::App* gen = app.add_subcommand(
      "generate", "Generate Wiener-Hammerstein train/val/test records");
  add_common(gen);
  gen->add_option("--nl", o.nl_target, "target nonlinearity level (percent)");
  gen->add_option("--std", o.input_std, "input std (skips calibration)");
  gen->add_option("--noise-std", o.noise_std, "output noise std");
  gen->add_option("--n-train", o.n_train, "training samples");
  gen->add_option("--n-val", o.n_val, "validation samples");
  gen->add_option("--n-test", o.n_test, "test samples");
  gen->add_option("--order", o.bla_order, "order for the level measurement");
  gen->add_option("--wh-config", o.wh_config_path, "system config JSON");

  CLI::App* bla = app.add_subcommand(
      "bla", "Fit a linear model by subspace identification");
  add_common(bla);
  bla->add_option("--train", o.train_csv, "training CSV")->required();
  bla->add_option("--test", o.test_csv, "test CSV (scored when given)");
  bla->add_option("--order", o.bla_order, "model order");
  bla->add_option("--horizon", o.horizon, "subspace horizon (0 = 4*order)");
  bla->add_option("--skip", o.skip, "samples skipped before scoring");
  bla->add_option("--errors", o.errors_path, "per-sample error CSV");

  CLI::App* trn = app.add_subcommand("train", "Train a SUBNET model");
  add_common(trn);
  trn->add_option("--train", o.train_csv, "training CSV")->required();
  trn->add_option("--val", o.val_csv, "validation CSV")->required();
  trn->add_option("--test", o.test_csv, "test CSV (scored when given)");
  trn->add_option("--bla", o.bla_path, "linear estimate JSON (Lin* schemes)");
  trn->add_option("--scheme", o.scheme,
                  "RanDY+RanENC | LinDY+RanENC | LinDY+LinENC");
  trn->add_option("--epochs", o.epochs, "training epochs");
  trn->add_option("--T", o.T, "rollout length");
  trn->add_option("--batch", o.batch_size, "batch size");
  trn->add_option("--lr", o.lr, "learning rate");
  trn->add_option("--order", o.n_x, "state dimension");
  trn->add_option("--n-a", o.n_a, "output window length");
  trn->add_option("--n-b", o.n_b, "input window length");
  trn->add_option("--hidden", o.hidden, "hidden widths")->delimiter(',');
  bool wh_benchmark = false;
  trn->add_flag("--preset-wh-benchmark", wh_benchmark,
                "order 6, T=80, n_a=n_b=6 (physical benchmark shape)");

  CLI::App* ev = app.add_subcommand("evaluate", "Evaluate a saved model");
  add_common(ev);
  ev->add_option("--model", o.model_path, "model JSON")->required();
  ev->add_option("--data", o.data_csv, "record CSV")->required();
  ev->add_option("--report", o.report_path, "report JSON path");
  ev->add_option("--errors", o.errors_path, "per-sample error CSV");

  CLI::App* ex = app.add_subcommand(
      "experiment", "Sweep nonlinearity levels x init schemes x seeds");
  add_common(ex);
  ex->add_option("--nl", o.nl_targets, "nonlinearity targets")->delimiter(',');
  ex->add_option("--schemes", o.schemes, "init schemes")->delimiter(',');
  ex->add_option("--runs", o.runs, "seeds per cell");
  ex->add_option("--epochs", o.epochs, "training epochs");
  ex->add_option("--n-train", o.n_train, "training samples");
  ex->add_option("--n-val", o.n_val, "validation samples");
  ex->add_option("--n-test", o.n_test, "test samples");
  ex->add_option("--T", o.T, "rollout length");
  ex->add_option("--batch", o.batch_size, "batch size");
  ex->add_option("--lr", o.lr, "learning rate");
  ex->add_option("--wh-config", o.wh_config_path, "system config JSON");

  CLI11_PARSE(app, argc, argv);

  if (wh_benchmark) {
    o.n_x = 6;
    o.n_a = o.n_b = 6;
    o.T = 80;
    o.bla_order = 6;
  }

  if (*gen) return cmd_generate(o);
  if (*bla) return cmd_bla(o);
  if (*trn) return cmd_train(o);
  if (*ev) return cmd_evaluate(o);
  if (*ex) return cmd_experiment(o);
  return 1;
}
