#include "subnet/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "io_util.hpp"
#include "subnet/errors.hpp"
#include "subnet/rng.hpp"

namespace subnet {

void Dataset::validate() const {
  if (u.rows() < 1 || y.rows() < 1)
    fail(ErrorCode::Dimension, "dataset needs at least one input and one output channel");
  if (u.cols() != y.cols())
    fail(ErrorCode::Dimension, "dataset u/y length mismatch: " +
                                   std::to_string(u.cols()) + " vs " +
                                   std::to_string(y.cols()));
  if (u.cols() < 1) fail(ErrorCode::Dimension, "dataset is empty");
  if (!u.allFinite() || !y.allFinite())
    fail(ErrorCode::InvalidArgument, "dataset contains non-finite values");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string cell = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    // Trim surrounding whitespace / carriage returns.
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, Eigen::Index row,
                  const std::string& path) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    fail(ErrorCode::Parse, path + ": non-numeric value '" + cell +
                               "' in data row " + std::to_string(row));
  return v;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  if (!std::getline(f, line))
    fail(ErrorCode::Schema, path + ": empty file, expected a header row");

  auto names = split_csv_line(line);
  // Map each header cell to (is_input, channel index).
  std::vector<int> u_col(names.size(), -1), y_col(names.size(), -1);
  Eigen::Index n_u = 0, n_y = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& name = names[i];
    if (name.size() < 3 || name[1] != '_' || (name[0] != 'u' && name[0] != 'y'))
      fail(ErrorCode::Schema,
           path + ": unexpected column '" + name + "' (want u_k / y_k)");
    int idx = -1;
    auto [ptr, ec] = std::from_chars(name.data() + 2, name.data() + name.size(), idx);
    if (ec != std::errc{} || ptr != name.data() + name.size() || idx < 0)
      fail(ErrorCode::Schema, path + ": unexpected column '" + name + "'");
    if (name[0] == 'u') {
      u_col[i] = idx;
      n_u = std::max<Eigen::Index>(n_u, idx + 1);
    } else {
      y_col[i] = idx;
      n_y = std::max<Eigen::Index>(n_y, idx + 1);
    }
  }
  // Every index 0..n-1 must appear exactly once per signal.
  std::vector<int> seen_u(n_u, 0), seen_y(n_y, 0);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (u_col[i] >= 0) seen_u[u_col[i]]++;
    if (y_col[i] >= 0) seen_y[y_col[i]]++;
  }
  for (Eigen::Index k = 0; k < n_u; ++k)
    if (seen_u[k] != 1)
      fail(ErrorCode::Schema, path + ": column u_" + std::to_string(k) +
                                  (seen_u[k] ? " duplicated" : " missing"));
  for (Eigen::Index k = 0; k < n_y; ++k)
    if (seen_y[k] != 1)
      fail(ErrorCode::Schema, path + ": column y_" + std::to_string(k) +
                                  (seen_y[k] ? " duplicated" : " missing"));
  if (n_u == 0) fail(ErrorCode::Schema, path + ": no u_* columns");
  if (n_y == 0) fail(ErrorCode::Schema, path + ": no y_* columns");

  std::vector<std::vector<double>> rows;
  Eigen::Index row_idx = 0;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != names.size())
      fail(ErrorCode::Schema, path + ": row " + std::to_string(row_idx) +
                                  " has " + std::to_string(cells.size()) +
                                  " cells, header has " +
                                  std::to_string(names.size()));
    std::vector<double> row(names.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      row[i] = parse_cell(cells[i], row_idx, path);
    rows.push_back(std::move(row));
    ++row_idx;
  }
  if (rows.empty()) fail(ErrorCode::Schema, path + ": no data rows");

  Dataset ds;
  ds.u.resize(n_u, static_cast<Eigen::Index>(rows.size()));
  ds.y.resize(n_y, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (u_col[i] >= 0) ds.u(u_col[i], static_cast<Eigen::Index>(t)) = rows[t][i];
      if (y_col[i] >= 0) ds.y(y_col[i], static_cast<Eigen::Index>(t)) = rows[t][i];
    }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  auto f = detail::open_out(path);
  for (Eigen::Index k = 0; k < ds.n_u(); ++k)
    f << (k ? "," : "") << "u_" << k;
  for (Eigen::Index k = 0; k < ds.n_y(); ++k) f << ",y_" << k;
  f << '\n';
  for (Eigen::Index t = 0; t < ds.n_samples(); ++t) {
    for (Eigen::Index k = 0; k < ds.n_u(); ++k)
      f << (k ? "," : "") << detail::fmt_double(ds.u(k, t));
    for (Eigen::Index k = 0; k < ds.n_y(); ++k)
      f << ',' << detail::fmt_double(ds.y(k, t));
    f << '\n';
  }
  if (!f) fail(ErrorCode::Io, "write failed: " + path);
}

namespace {

void fit_channel_stats(const Eigen::MatrixXd& sig, Eigen::VectorXd& mean,
                       Eigen::VectorXd& std_dev, const char* what) {
  const Eigen::Index n = sig.cols();
  mean = sig.rowwise().mean();
  std_dev.resize(sig.rows());
  for (Eigen::Index k = 0; k < sig.rows(); ++k) {
    double var = (sig.row(k).array() - mean(k)).square().sum() / double(n);
    std_dev(k) = std::sqrt(var);
    if (std_dev(k) < 1e-12 * std::max(1.0, std::abs(mean(k))))
      fail(ErrorCode::DegenerateData,
           std::string(what) + " channel " + std::to_string(k) +
               " is (near) constant; cannot normalize");
  }
}

}  // namespace

Normalizer fit_normalizer(const Dataset& ds) {
  ds.validate();
  Normalizer nz;
  fit_channel_stats(ds.u, nz.mean_u, nz.std_u, "input");
  fit_channel_stats(ds.y, nz.mean_y, nz.std_y, "output");
  return nz;
}

namespace {

void check_nz_dims(const Dataset& ds, const Normalizer& nz) {
  if (nz.mean_u.size() != ds.n_u() || nz.mean_y.size() != ds.n_y())
    fail(ErrorCode::Dimension, "normalizer channel count does not match dataset");
}

}  // namespace

Dataset apply_normalizer(const Dataset& ds, const Normalizer& nz) {
  check_nz_dims(ds, nz);
  Dataset out = ds;
  out.u = (ds.u.colwise() - nz.mean_u).array().colwise() / nz.std_u.array();
  out.y = (ds.y.colwise() - nz.mean_y).array().colwise() / nz.std_y.array();
  return out;
}

Dataset invert_normalizer(const Dataset& ds, const Normalizer& nz) {
  check_nz_dims(ds, nz);
  Dataset out = ds;
  out.u = (ds.u.array().colwise() * nz.std_u.array()).colwise() + nz.mean_u.array();
  out.y = (ds.y.array().colwise() * nz.std_y.array()).colwise() + nz.mean_y.array();
  return out;
}

std::array<Dataset, 3> split_dataset(const Dataset& ds, double f_train,
                                     double f_val, double f_test) {
  ds.validate();
  if (f_train < 0 || f_val < 0 || f_test < 0)
    fail(ErrorCode::InvalidArgument, "split fractions must be non-negative");
  if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument, "split fractions must sum to 1");
  const Eigen::Index n = ds.n_samples();
  const Eigen::Index c1 = static_cast<Eigen::Index>(std::llround(n * f_train));
  const Eigen::Index c2 =
      static_cast<Eigen::Index>(std::llround(n * (f_train + f_val)));
  const Eigen::Index lens[3] = {c1, c2 - c1, n - c2};
  for (int i = 0; i < 3; ++i)
    if (lens[i] < 1)
      fail(ErrorCode::InvalidArgument,
           "split leaves segment " + std::to_string(i) + " empty");
  auto take = [&](Eigen::Index begin, Eigen::Index len) {
    Dataset part;
    part.u = ds.u.middleCols(begin, len);
    part.y = ds.y.middleCols(begin, len);
    part.sample_rate = ds.sample_rate;
    return part;
  };
  return {take(0, lens[0]), take(c1, lens[1]), take(c2, lens[2])};
}

Eigen::MatrixXd generate_white_gaussian(Eigen::Index n_samples, double std_dev,
                                        std::uint64_t seed,
                                        Eigen::Index n_channels) {
  if (n_samples < 1 || n_channels < 1)
    fail(ErrorCode::InvalidArgument, "white noise: need at least one sample/channel");
  if (std_dev < 0)
    fail(ErrorCode::InvalidArgument, "white noise: negative std");
  Rng rng(seed);
  Eigen::MatrixXd out(n_channels, n_samples);
  for (Eigen::Index t = 0; t < n_samples; ++t)
    for (Eigen::Index k = 0; k < n_channels; ++k)
      out(k, t) = std_dev * rng.gaussian();
  return out;
}

}  // namespace subnet
