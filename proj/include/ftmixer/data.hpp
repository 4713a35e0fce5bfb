#pragma once

#include "ftmixer/diffarray.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ftmixer {

enum class Split { Train, Val, Test };

std::string split_name(Split split);
Split parse_split(const std::string& name);

struct SplitBounds {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
};

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// Per-channel statistics of the training rows.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stdev;
  std::vector<bool> clamped;  // stdev was 0 and got floored
};

inline constexpr double kStandardizeEpsilon = 1e-8;

/// Multivariate series, channels x time.
struct SeriesDataset {
  std::string name;
  RowMatrix values;  // [N, T]
  std::vector<std::string> timestamps;
  std::vector<std::string> channel_names;
  std::optional<SplitBounds> split;
  std::optional<NormStats> norm_stats;
  bool standardized = false;

  std::size_t channels() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(values.cols()); }
  /// Half-open [begin, end) time range of a split; requires split bounds.
  std::pair<std::size_t, std::size_t> range(Split s) const;
};

/// Header "date,<ch1>,...". Every cell after the first must be a finite number.
SeriesDataset parse_csv(std::istream& in, std::string name);
SeriesDataset load_csv(const std::filesystem::path& path);

/// Floors T * ratio for the train and validation lengths; the remainder is
/// test. Each segment must hold at least min_segment steps (pass L + horizon).
/// Also computes the training statistics.
SeriesDataset chronological_split(SeriesDataset ds, SplitRatios ratios, std::size_t min_segment);

/// Ratios for a dataset name: 6:2:2 for ETT*, 7:1:2 otherwise.
SplitRatios default_split_ratios(const std::string& dataset_name);

NormStats compute_norm_stats(const RowMatrix& values, std::size_t train_end);

/// (x - mean) / stdev per channel with the training statistics.
/// A zero-variance channel is floored at kStandardizeEpsilon with a warning on stderr.
SeriesDataset standardize(const SeriesDataset& ds);
RowMatrix destandardize(const RowMatrix& values, const NormStats& stats);

/// Absolute start indices of every input window in a split; the matching
/// target window starts at start + lookback.
std::vector<std::size_t> window_samples(const SeriesDataset& ds, Split split, std::size_t lookback,
                                        std::size_t horizon, std::size_t stride = 1);

struct ForecastBatch {
  DiffArray inputs;   // [B, N, L]
  DiffArray targets;  // [B, N, horizon]
  std::vector<std::size_t> starts;
};

ForecastBatch make_batch(const SeriesDataset& ds, std::span<const std::size_t> starts, std::size_t lookback,
                         std::size_t horizon);

/// One channel per phase offset: amplitude * sin(2 pi t / period + phase).
SeriesDataset make_sinusoid_dataset(std::size_t steps, double period, double amplitude,
                                    std::size_t channels = 1);

}  // namespace ftmixer
