#include "ftmixer/data.hpp"

#include "ftmixer/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace ftmixer {

std::string split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

std::pair<std::size_t, std::size_t> SeriesDataset::range(Split s) const {
  if (!split) throw ContractError("dataset '" + name + "' has no split boundaries");
  switch (s) {
    case Split::Train: return {0, split->train_end};
    case Split::Val: return {split->train_end, split->val_end};
    case Split::Test: return {split->val_end, length()};
  }
  return {0, 0};
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

}  // namespace

SeriesDataset parse_csv(std::istream& in, std::string name) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
  auto header = split_cells(strip(line));
  for (auto& h : header) h = strip(h);
  if (header.size() < 2) throw ParseError("line 1: header needs a date column and at least one channel");
  if (header[0] != "date") throw ParseError("line 1: first header cell must be 'date', got '" + header[0] + "'");

  SeriesDataset ds;
  ds.name = std::move(name);
  ds.channel_names.assign(header.begin() + 1, header.end());
  const std::size_t n = ds.channel_names.size();
  std::vector<std::vector<double>> columns(n);

  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    auto cells = split_cells(line);
    if (cells.size() != n + 1) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(n + 1) +
                       " cells, got " + std::to_string(cells.size()));
    }
    ds.timestamps.push_back(strip(cells[0]));
    for (std::size_t c = 0; c < n; ++c) {
      const std::string cell = strip(cells[c + 1]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("line " + std::to_string(lineno) + ", column '" + ds.channel_names[c] +
                         "': not a number: '" + cell + "'");
      }
      if (!std::isfinite(v)) {
        throw ParseError("line " + std::to_string(lineno) + ", column '" + ds.channel_names[c] +
                         "': non-finite value '" + cell + "'");
      }
      columns[c].push_back(v);
    }
  }
  const std::size_t t = ds.timestamps.size();
  if (t == 0) throw ParseError("no data rows");
  ds.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < t; ++i) {
      ds.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = columns[c][i];
    }
  }
  return ds;
}

SeriesDataset load_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open dataset " + path.string());
  return parse_csv(f, path.stem().string());
}

SplitRatios default_split_ratios(const std::string& dataset_name) {
  if (dataset_name.rfind("ETT", 0) == 0 || dataset_name.rfind("ett", 0) == 0) return {0.6, 0.2, 0.2};
  return {0.7, 0.1, 0.2};
}

NormStats compute_norm_stats(const RowMatrix& values, std::size_t train_end) {
  if (train_end == 0 || train_end > static_cast<std::size_t>(values.cols())) {
    throw ContractError("compute_norm_stats: train_end out of range");
  }
  NormStats s;
  const auto n = values.rows();
  const auto t = static_cast<Eigen::Index>(train_end);
  s.mean.resize(n);
  s.stdev.resize(n);
  s.clamped.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto row = values.row(c).head(t);
    const double mu = row.mean();
    const double var = (row.array() - mu).square().sum() / static_cast<double>(t);
    double sd = std::sqrt(var);
    if (sd == 0.0) {
      sd = kStandardizeEpsilon;
      s.clamped[static_cast<std::size_t>(c)] = true;
    }
    s.mean[c] = mu;
    s.stdev[c] = sd;
  }
  return s;
}

SeriesDataset chronological_split(SeriesDataset ds, SplitRatios ratios, std::size_t min_segment) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  const std::size_t t = ds.length();
  // The small offset keeps products like 17420 * 0.6 from flooring one short.
  const auto floor_len = [t](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(t) * r + 1e-6));
  };
  const std::size_t train_len = floor_len(ratios.train);
  const std::size_t val_len = floor_len(ratios.val);
  if (train_len + val_len > t) throw ConfigError("split ratios exceed the series length");
  const std::size_t test_len = t - train_len - val_len;
  if (train_len == 0 || val_len == 0 || test_len == 0) {
    throw ConfigError("split leaves an empty segment (train " + std::to_string(train_len) + ", val " +
                      std::to_string(val_len) + ", test " + std::to_string(test_len) + ")");
  }
  if (train_len < min_segment || val_len < min_segment || test_len < min_segment) {
    throw ConfigError("split segment shorter than lookback + horizon = " + std::to_string(min_segment) +
                      " (train " + std::to_string(train_len) + ", val " + std::to_string(val_len) + ", test " +
                      std::to_string(test_len) + ")");
  }
  ds.split = SplitBounds{train_len, train_len + val_len};
  ds.norm_stats = compute_norm_stats(ds.values, train_len);
  return ds;
}

SeriesDataset standardize(const SeriesDataset& ds) {
  if (!ds.norm_stats) throw ContractError("standardize: dataset '" + ds.name + "' has no statistics");
  if (ds.standardized) throw ContractError("standardize: dataset '" + ds.name + "' is already standardized");
  const auto& s = *ds.norm_stats;
  for (std::size_t c = 0; c < s.clamped.size(); ++c) {
    if (s.clamped[c]) {
      std::clog << "warning: channel '" << (c < ds.channel_names.size() ? ds.channel_names[c] : std::to_string(c))
                << "' has zero variance on the training split; stdev floored at " << kStandardizeEpsilon << '\n';
    }
  }
  SeriesDataset out = ds;
  for (Eigen::Index c = 0; c < out.values.rows(); ++c) {
    out.values.row(c) = (out.values.row(c).array() - s.mean[c]) / s.stdev[c];
  }
  out.standardized = true;
  return out;
}

RowMatrix destandardize(const RowMatrix& values, const NormStats& stats) {
  if (values.rows() != stats.mean.size()) {
    throw ContractError("destandardize: " + std::to_string(values.rows()) + " channels, stats hold " +
                        std::to_string(stats.mean.size()));
  }
  RowMatrix out(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.rows(); ++c) {
    out.row(c) = values.row(c).array() * stats.stdev[c] + stats.mean[c];
  }
  return out;
}

std::vector<std::size_t> window_samples(const SeriesDataset& ds, Split split, std::size_t lookback,
                                        std::size_t horizon, std::size_t stride) {
  if (stride == 0) throw ConfigError("window stride must be at least 1");
  const auto [begin, end] = ds.range(split);
  const std::size_t span = lookback + horizon;
  if (end - begin < span) {
    throw ConfigError(split_name(split) + " split has " + std::to_string(end - begin) +
                      " steps, need lookback + horizon = " + std::to_string(span));
  }
  std::vector<std::size_t> starts;
  for (std::size_t s = begin; s + span <= end; s += stride) starts.push_back(s);
  return starts;
}

ForecastBatch make_batch(const SeriesDataset& ds, std::span<const std::size_t> starts, std::size_t lookback,
                         std::size_t horizon) {
  if (starts.empty()) throw ContractError("make_batch: no samples");
  const std::size_t n = ds.channels();
  const std::size_t b = starts.size();
  std::vector<double> x(b * n * lookback);
  std::vector<double> y(b * n * horizon);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t s = starts[i];
    if (s + lookback + horizon > ds.length()) throw ContractError("make_batch: window runs past the series end");
    for (std::size_t c = 0; c < n; ++c) {
      const double* row = ds.values.row(static_cast<Eigen::Index>(c)).data();
      std::copy_n(row + s, lookback, x.data() + (i * n + c) * lookback);
      std::copy_n(row + s + lookback, horizon, y.data() + (i * n + c) * horizon);
    }
  }
  ForecastBatch batch;
  batch.inputs = DiffArray({b, n, lookback}, std::move(x));
  batch.targets = DiffArray({b, n, horizon}, std::move(y));
  batch.starts.assign(starts.begin(), starts.end());
  return batch;
}

SeriesDataset make_sinusoid_dataset(std::size_t steps, double period, double amplitude, std::size_t channels) {
  SeriesDataset ds;
  ds.name = "sinusoid";
  ds.values.resize(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(steps));
  for (std::size_t c = 0; c < channels; ++c) {
    ds.channel_names.push_back("s" + std::to_string(c));
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(channels);
    for (std::size_t t = 0; t < steps; ++t) {
      ds.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) =
          amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase);
    }
  }
  for (std::size_t t = 0; t < steps; ++t) ds.timestamps.push_back(std::to_string(t));
  return ds;
}

}  // namespace ftmixer
