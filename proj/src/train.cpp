#include "ftmixer/train.hpp"

#include "ftmixer/format.hpp"
#include "ftmixer/optim.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace ftmixer {

std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::NoFcc: return "no_fcc";
    case Ablation::NoWfc: return "no_wfc";
    case Ablation::NoFreqLoss: return "no_freq_loss";
    case Ablation::NoTimeLoss: return "no_time_loss";
  }
  return "?";
}

Ablation parse_ablation(const std::string& name) {
  for (auto a : {Ablation::Full, Ablation::NoFcc, Ablation::NoWfc, Ablation::NoFreqLoss, Ablation::NoTimeLoss}) {
    if (ablation_name(a) == name) return a;
  }
  throw ConfigError("unknown ablation '" + name + "' (full, no_fcc, no_wfc, no_freq_loss, no_time_loss)");
}

ForwardOptions forward_options(Ablation a) {
  return {.use_fcc = a != Ablation::NoFcc, .use_wfc = a != Ablation::NoWfc};
}

LossTerms loss_terms(Ablation a) {
  return {.time = a != Ablation::NoTimeLoss, .freq = a != Ablation::NoFreqLoss};
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train config: epochs must be at least 1");
  if (batch_size < 1 || eval_batch_size < 1) throw ConfigError("train config: batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train config: learning rate must be positive");
  if (!(grad_clip > 0.0)) throw ConfigError("train config: grad_clip must be positive");
}

std::string to_key_values(const TrainConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "epochs = " << c.epochs << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "learning_rate = " << format_real(c.learning_rate) << '\n'
     << "patience = " << c.patience << '\n'
     << "seed = " << c.seed << '\n'
     << "ablation = " << ablation_name(c.ablation) << '\n'
     << "grad_clip = " << format_real(c.grad_clip) << '\n';
  return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

nlohmann::ordered_json model_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["lookback"] = c.lookback;
  j["horizon"] = c.horizon;
  j["channels"] = c.channels;
  j["fcc_embed_dim"] = c.fcc_embed_dim;
  j["patch_scales"] = c.patch_scales;
  j["patch_embed_dim"] = c.patch_embed_dim;
  j["fcc_kernel_size"] = c.effective_fcc_kernel();
  j["wfc_kernel_size"] = c.wfc_kernel_size;
  j["ds_dw_kernel_size"] = c.ds_dw_kernel_size;
  j["revin_epsilon"] = c.revin_epsilon;
  j["seed"] = c.seed;
  return j;
}

nlohmann::ordered_json train_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["patience"] = c.patience;
  j["seed"] = c.seed;
  j["ablation"] = ablation_name(c.ablation);
  j["grad_clip"] = c.grad_clip;
  return j;
}

}  // namespace

std::string run_report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["model_config"] = model_json(r.model_config);
  j["train_config"] = train_json(r.train_config);
  j["parameter_count"] = r.parameter_count;
  auto& epochs = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : r.epochs) {
    nlohmann::ordered_json row;
    row["epoch"] = e.epoch;
    row["time_loss"] = e.train.time_loss;
    row["freq_loss"] = e.train.freq_loss;
    row["total"] = e.train.total;
    row["val_mse"] = e.val_mse;
    row["val_mae"] = e.val_mae;
    row["seconds"] = e.seconds;
    epochs.push_back(row);
  }
  j["best_epoch"] = r.best_epoch;
  j["best_val_mse"] = r.best_val_mse;
  j["early_stopped"] = r.early_stopped;
  j["test"] = nlohmann::ordered_json::parse(metrics_json(r.test, -1));
  j["wall_seconds"] = r.wall_seconds;
  return j.dump(2);
}

std::string epoch_loss_csv(const RunReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,time_loss,freq_loss,total,val_mse,val_mae,seconds\n";
  for (const auto& e : r.epochs) {
    os << e.epoch << ',' << e.train.time_loss << ',' << e.train.freq_loss << ',' << e.train.total << ','
       << e.val_mse << ',' << e.val_mae << ',' << e.seconds << '\n';
  }
  return os.str();
}

SeriesDataset prepare_dataset(SeriesDataset raw, std::size_t min_segment) {
  if (!raw.split) raw = chronological_split(std::move(raw), default_split_ratios(raw.name), min_segment);
  if (!raw.standardized) raw = standardize(raw);
  return raw;
}

Metrics evaluate_predictor(const SeriesDataset& dataset, Split split, std::size_t lookback, std::size_t horizon,
                           const Predictor& predict, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("evaluate: batch size must be at least 1");
  const auto starts = window_samples(dataset, split, lookback, horizon);
  MetricAccumulator acc;
  NoGradGuard no_grad;
  for (std::size_t b = 0; b < starts.size(); b += batch_size) {
    const std::size_t e = std::min(starts.size(), b + batch_size);
    auto batch = make_batch(dataset, std::span(starts).subspan(b, e - b), lookback, horizon);
    acc.add(batch.targets, predict(batch));
  }
  Metrics m;
  m.mse = acc.mse();
  m.mae = acc.mae();
  m.horizon = horizon;
  m.dataset = dataset.name;
  m.split = split_name(split);
  m.samples = starts.size();
  return m;
}

Metrics evaluate(const ModelConfig& config, const FtMixerParams& params, const SeriesDataset& dataset, Split split,
                 ForwardOptions options, std::size_t batch_size) {
  if (dataset.channels() != config.channels) {
    throw ContractError("evaluate: model expects " + std::to_string(config.channels) + " channels, dataset '" +
                        dataset.name + "' has " + std::to_string(dataset.channels()));
  }
  return evaluate_predictor(
      dataset, split, config.lookback, config.horizon,
      [&](const ForecastBatch& b) { return ftmixer_forward(b.inputs, params, config, options); }, batch_size);
}

TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config, const SeriesDataset& dataset,
                  const EpochCallback& on_epoch) {
  model_config.validate();
  train_config.validate();
  if (!dataset.split) throw ContractError("train: dataset '" + dataset.name + "' has no split");
  if (dataset.channels() != model_config.channels) {
    throw ContractError("train: model expects " + std::to_string(model_config.channels) + " channels, dataset has " +
                        std::to_string(dataset.channels()));
  }
  const SeriesDataset ds = dataset.standardized ? dataset : standardize(dataset);
  const auto t0 = Clock::now();

  const std::size_t lookback = model_config.lookback;
  const std::size_t horizon = model_config.horizon;
  auto train_starts = window_samples(ds, Split::Train, lookback, horizon);
  // Fail early if validation or test cannot form a window.
  window_samples(ds, Split::Val, lookback, horizon);
  window_samples(ds, Split::Test, lookback, horizon);

  const auto fwd = forward_options(train_config.ablation);
  const auto terms = loss_terms(train_config.ablation);

  FtMixerParams params = FtMixerParams::initialize(model_config);
  std::vector<DiffArray> tensors = params.list();
  AdamState adam(tensors, {.learning_rate = train_config.learning_rate});
  std::mt19937_64 rng(train_config.seed);

  TrainResult result{{}, params.clone()};
  RunReport& report = result.report;
  report.dataset = ds.name;
  report.model_config = model_config;
  report.train_config = train_config;
  report.parameter_count = params.count();
  report.best_val_mse = std::numeric_limits<double>::infinity();

  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
    const auto e0 = Clock::now();
    std::shuffle(train_starts.begin(), train_starts.end(), rng);
    LossBreakdown sums;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < train_starts.size(); b += train_config.batch_size) {
      const std::size_t e = std::min(train_starts.size(), b + train_config.batch_size);
      auto batch = make_batch(ds, std::span(train_starts).subspan(b, e - b), lookback, horizon);
      auto prediction = ftmixer_forward(batch.inputs, params, model_config, fwd);
      auto loss = dual_domain_loss(batch.targets, prediction, terms);
      if (!std::isfinite(loss.breakdown.total)) {
        report.wall_seconds = seconds_since(t0);
        throw TrainingAborted("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                  std::to_string(batches),
                              result);
      }
      backward(loss.total);
      clip_grad_norm(tensors, train_config.grad_clip);
      adam_step(tensors, adam);
      zero_grads(tensors);
      sums.time_loss += loss.breakdown.time_loss;
      sums.freq_loss += loss.breakdown.freq_loss;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train.time_loss = sums.time_loss / static_cast<double>(batches);
    rec.train.freq_loss = sums.freq_loss / static_cast<double>(batches);
    rec.train.total = rec.train.time_loss + rec.train.freq_loss;
    const auto val = evaluate(model_config, params, ds, Split::Val, fwd, train_config.eval_batch_size);
    rec.val_mse = val.mse;
    rec.val_mae = val.mae;
    rec.seconds = seconds_since(e0);
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!std::isfinite(val.mse)) {
      report.wall_seconds = seconds_since(t0);
      throw TrainingAborted("non-finite validation MSE at epoch " + std::to_string(epoch), result);
    }
    if (val.mse < report.best_val_mse) {
      report.best_val_mse = val.mse;
      report.best_epoch = epoch;
      result.params = params.clone();
      since_best = 0;
    } else if (++since_best >= train_config.patience && train_config.patience > 0) {
      report.early_stopped = true;
      break;
    }
  }

  report.test = evaluate(model_config, result.params, ds, Split::Test, fwd, train_config.eval_batch_size);
  report.wall_seconds = seconds_since(t0);
  return result;
}

std::vector<SweepRow> run_length_sweep(const SeriesDataset& dataset, const std::vector<std::size_t>& lookbacks,
                                       std::size_t horizon, const ModelConfig& base_model,
                                       const TrainConfig& train_config, const EpochCallback& on_epoch) {
  if (lookbacks.empty()) throw ConfigError("sweep: no lookback lengths given");
  const std::size_t longest = *std::max_element(lookbacks.begin(), lookbacks.end());
  const SeriesDataset ds = prepare_dataset(dataset, longest + horizon);
  std::vector<SweepRow> rows;
  for (auto lookback : lookbacks) {
    ModelConfig c = base_model;
    c.lookback = lookback;
    c.horizon = horizon;
    c.channels = ds.channels();
    c.patch_scales = default_patch_scales(lookback);
    const auto t0 = Clock::now();
    auto run = train(c, train_config, ds, on_epoch);
    SweepRow row;
    row.lookback = lookback;
    row.patch_scales = c.patch_scales;
    row.test = run.report.test;
    row.best_epoch = run.report.best_epoch;
    row.seconds = seconds_since(t0);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "lookback,patch_scales,mse,mae,best_epoch,seconds\n";
  for (const auto& r : rows) {
    std::string scales;
    for (std::size_t i = 0; i < r.patch_scales.size(); ++i) scales += (i ? ";" : "") + std::to_string(r.patch_scales[i]);
    os << r.lookback << ',' << scales << ',' << r.test.mse << ',' << r.test.mae << ',' << r.best_epoch << ','
       << r.seconds << '\n';
  }
  return os.str();
}

}  // namespace ftmixer
