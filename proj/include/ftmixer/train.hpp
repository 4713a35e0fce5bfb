#pragma once

#include "ftmixer/data.hpp"
#include "ftmixer/errors.hpp"
#include "ftmixer/loss_metrics.hpp"
#include "ftmixer/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ftmixer {

enum class Ablation { Full, NoFcc, NoWfc, NoFreqLoss, NoTimeLoss };

std::string ablation_name(Ablation a);
Ablation parse_ablation(const std::string& name);
ForwardOptions forward_options(Ablation a);
LossTerms loss_terms(Ablation a);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t patience = 5;
  std::uint64_t seed = 2024;
  Ablation ablation = Ablation::Full;
  double grad_clip = 5.0;
  std::size_t eval_batch_size = 256;

  void validate() const;
};

std::string to_key_values(const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 0-based
  LossBreakdown train;    // mean over batches
  double val_mse = 0.0;
  double val_mae = 0.0;
  double seconds = 0.0;
};

struct RunReport {
  std::string dataset;
  ModelConfig model_config;
  TrainConfig train_config;
  std::size_t parameter_count = 0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  bool early_stopped = false;
  Metrics test;
  double wall_seconds = 0.0;
};

std::string run_report_json(const RunReport& report);
/// epoch,time_loss,freq_loss,total,val_mse,val_mae,seconds
std::string epoch_loss_csv(const RunReport& report);

struct TrainResult {
  RunReport report;
  FtMixerParams params;  // weights of the best validation epoch
};

/// Training hit a non-finite loss. Carries the last good weights.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, TrainResult partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const TrainResult& partial() const { return partial_; }

 private:
  TrainResult partial_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on the dual-domain loss with per-epoch validation, early stopping on
/// validation MSE and best-epoch weight retention. The dataset must carry
/// split bounds; it is standardized here if it is not already.
TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config, const SeriesDataset& dataset,
                  const EpochCallback& on_epoch = {});

using Predictor = std::function<DiffArray(const ForecastBatch&)>;

/// Sweeps every stride-1 window of a split in order, final partial batch included.
Metrics evaluate_predictor(const SeriesDataset& dataset, Split split, std::size_t lookback, std::size_t horizon,
                           const Predictor& predict, std::size_t batch_size = 256);

Metrics evaluate(const ModelConfig& config, const FtMixerParams& params, const SeriesDataset& dataset, Split split,
                 ForwardOptions options = {}, std::size_t batch_size = 256);

struct SweepRow {
  std::size_t lookback = 0;
  std::vector<std::size_t> patch_scales;
  Metrics test;
  std::size_t best_epoch = 0;
  double seconds = 0.0;
};

/// Trains one model per lookback (patch scales re-derived per length) and
/// reports test metrics.
std::vector<SweepRow> run_length_sweep(const SeriesDataset& dataset, const std::vector<std::size_t>& lookbacks,
                                       std::size_t horizon, const ModelConfig& base_model,
                                       const TrainConfig& train_config, const EpochCallback& on_epoch = {});

/// lookback,patch_scales,mse,mae,best_epoch,seconds
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Puts split bounds on a raw dataset (if missing) and standardizes it.
SeriesDataset prepare_dataset(SeriesDataset raw, std::size_t min_segment);

}  // namespace ftmixer
