// ftmixer command-line entry point: train / eval / predict / spectrum / sweep.
//
// Exit codes: 0 ok, 1 configuration error, 2 data error, 3 numeric abort.
// Each failure prints one line "error[<class>]: <reason>" on stderr.

#include "ftmixer/checkpoint.hpp"
#include "ftmixer/config.hpp"
#include "ftmixer/data.hpp"
#include "ftmixer/errors.hpp"
#include "ftmixer/model.hpp"
#include "ftmixer/spectral.hpp"
#include "ftmixer/train.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace ftmixer;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kData = 2, kNumeric = 3 };

struct Flags {
  std::string config_file;
  std::optional<std::string> data;
  std::optional<std::string> output;
  std::optional<std::size_t> lookback;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> patch_scales;
  std::optional<std::string> ablation;
  std::optional<std::string> checkpoint;
  std::optional<std::string> lengths;
  std::string split = "test";
  std::size_t channel = 0;
  std::optional<std::size_t> start;
  std::optional<std::size_t> len;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "Key-value config file; flags override it");
  cmd->add_option("--data", f.data, "Input CSV (header: date,<channels...>)");
  cmd->add_option("--output", f.output, "Output directory");
}

void add_model_train(CLI::App* cmd, Flags& f) {
  cmd->add_option("--lookback", f.lookback, "Lookback window L");
  cmd->add_option("--horizon", f.horizon, "Forecast horizon");
  cmd->add_option("--epochs", f.epochs, "Maximum epochs");
  cmd->add_option("--batch-size", f.batch_size, "Training batch size");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--seed", f.seed, "Seed for initialization and shuffling");
  cmd->add_option("--patch-scales", f.patch_scales, "Comma-separated WFC window sizes, e.g. 24,48");
  cmd->add_option("--ablation", f.ablation, "full | no_fcc | no_wfc | no_freq_loss | no_time_loss");
}

CliConfig resolve(const Flags& f) {
  CliConfig c = f.config_file.empty() ? CliConfig{} : load_cli_config(f.config_file);
  if (f.data) c.data_path = *f.data;
  if (f.output) c.output_dir = *f.output;
  if (f.lookback) c.model.lookback = *f.lookback;
  if (f.horizon) c.model.horizon = *f.horizon;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.batch_size) c.train.batch_size = *f.batch_size;
  if (f.lr) c.train.learning_rate = *f.lr;
  if (f.seed) c.set_seed(*f.seed);
  if (f.patch_scales) {
    c.model.patch_scales = parse_scale_list("--patch-scales", *f.patch_scales);
    c.patch_scales_set = true;
  }
  if (f.ablation) c.train.ablation = parse_ablation(*f.ablation);
  if (f.checkpoint) c.checkpoint = *f.checkpoint;
  if (f.lengths) c.lengths = parse_scale_list("--lengths", *f.lengths);
  if (!c.patch_scales_set) c.model.patch_scales = default_patch_scales(c.model.lookback);
  return c;
}

std::string comment_header(const CliConfig& c) {
  std::ostringstream os;
  std::istringstream in(to_config_text(c));
  std::string line;
  while (std::getline(in, line)) os << "# " << line << '\n';
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

SeriesDataset load_dataset(const CliConfig& c) {
  if (c.data_path.empty()) throw ConfigError("--data is required");
  return load_csv(c.data_path);
}

fs::path ensure_output(const CliConfig& c) {
  fs::path out(c.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

void print_epoch(const EpochRecord& e) {
  std::cerr << "epoch " << e.epoch << "  train " << e.train.total << " (time " << e.train.time_loss << ", freq "
            << e.train.freq_loss << ")  val_mse " << e.val_mse << "  " << e.seconds << "s\n";
}

int cmd_train(const Flags& f) {
  CliConfig c = resolve(f);
  auto raw = load_dataset(c);
  c.model.channels = raw.channels();
  c.model.validate();
  c.train.validate();
  const fs::path out = ensure_output(c);
  auto ds = prepare_dataset(std::move(raw), c.model.lookback + c.model.horizon);
  write_text(out / "config.txt", to_config_text(c));
  try {
    auto result = train(c.model, c.train, ds, print_epoch);
    write_checkpoint(out / "checkpoint.ftmx", make_checkpoint(c.model, result.params));
    write_text(out / "report.json", run_report_json(result.report));
    write_text(out / "epoch_loss.csv", comment_header(c) + epoch_loss_csv(result.report));
    std::cout << metrics_json(result.report.test) << '\n';
  } catch (const TrainingAborted& e) {
    write_checkpoint(out / "checkpoint.ftmx", make_checkpoint(c.model, e.partial().params));
    write_text(out / "report.json", run_report_json(e.partial().report));
    throw;
  }
  return kOk;
}

std::pair<ModelConfig, FtMixerParams> load_checkpoint_flag(const CliConfig& c) {
  if (c.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  if (!fs::exists(c.checkpoint)) throw DataError("checkpoint not found: " + c.checkpoint);
  return load_model(read_checkpoint(c.checkpoint));
}

int cmd_eval(const Flags& f) {
  CliConfig c = resolve(f);
  auto [model, params] = load_checkpoint_flag(c);
  c.model = model;
  auto ds = prepare_dataset(load_dataset(c), model.lookback + model.horizon);
  const auto metrics = evaluate(model, params, ds, parse_split(f.split), forward_options(c.train.ablation));
  auto j = nlohmann::ordered_json::parse(metrics_json(metrics));
  j["config"] = to_config_text(c);
  std::cout << j.dump(2) << '\n';
  if (f.output) {
    const fs::path out = ensure_output(c);
    write_text(out / "metrics.json", j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_predict(const Flags& f) {
  CliConfig c = resolve(f);
  auto [model, params] = load_checkpoint_flag(c);
  c.model = model;
  auto ds = prepare_dataset(load_dataset(c), model.lookback + model.horizon);
  const auto split = parse_split(f.split);
  const auto starts = window_samples(ds, split, model.lookback, model.horizon);
  std::size_t start = starts.front();
  if (f.start) {
    start = *f.start;
    if (start + model.lookback + model.horizon > ds.length()) throw ConfigError("--start puts the window past the series end");
  }
  const std::size_t one[] = {start};
  auto batch = make_batch(ds, one, model.lookback, model.horizon);
  DiffArray pred;
  {
    NoGradGuard no_grad;
    pred = ftmixer_forward(batch.inputs, params, model, forward_options(c.train.ablation));
  }
  // Forecasts are reported in the original units of the CSV.
  const auto n = static_cast<Eigen::Index>(model.channels);
  const auto h = static_cast<Eigen::Index>(model.horizon);
  const RowMatrix predicted = destandardize(Eigen::Map<const RowMatrix>(pred.values().data(), n, h), *ds.norm_stats);
  const RowMatrix actual =
      destandardize(Eigen::Map<const RowMatrix>(batch.targets.values().data(), n, h), *ds.norm_stats);
  std::ostringstream os;
  os.precision(17);
  os << comment_header(c) << "# input_start = " << start << '\n' << "channel,step,predicted,actual\n";
  for (Eigen::Index ch = 0; ch < n; ++ch) {
    for (Eigen::Index s = 0; s < h; ++s) {
      os << ds.channel_names[static_cast<std::size_t>(ch)] << ',' << s << ',' << predicted(ch, s) << ','
         << actual(ch, s) << '\n';
    }
  }
  std::cout << os.str();
  if (f.output) write_text(ensure_output(c) / "forecast.csv", os.str());
  return kOk;
}

int cmd_spectrum(const Flags& f) {
  CliConfig c = resolve(f);
  auto ds = load_dataset(c);
  if (f.channel >= ds.channels()) {
    throw ConfigError("--channel " + std::to_string(f.channel) + " out of range (" + std::to_string(ds.channels()) +
                      " channels)");
  }
  const std::size_t start = f.start.value_or(0);
  const std::size_t len = f.len.value_or(c.model.lookback);
  if (len == 0 || start + len > ds.length()) {
    throw ConfigError("window [" + std::to_string(start) + ", " + std::to_string(start + len) +
                      ") does not fit the series of length " + std::to_string(ds.length()));
  }
  const auto window = ds.values.row(static_cast<Eigen::Index>(f.channel))
                          .segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len));
  const auto spectrum = dct(window);
  std::ostringstream os;
  os.precision(17);
  os << comment_header(c) << "# channel = " << ds.channel_names[f.channel] << ", start = " << start
     << ", len = " << len << '\n'
     << "k,coefficient\n";
  for (Eigen::Index k = 0; k < spectrum.length(); ++k) os << k << ',' << spectrum.coefficients[k] << '\n';
  std::cout << os.str();
  if (f.output) write_text(ensure_output(c) / "spectrum.csv", os.str());
  return kOk;
}

int cmd_sweep(const Flags& f) {
  CliConfig c = resolve(f);
  auto raw = load_dataset(c);
  c.model.channels = raw.channels();
  c.train.validate();
  const fs::path out = ensure_output(c);
  const auto rows = run_length_sweep(raw, c.lengths, c.model.horizon, c.model, c.train, print_epoch);
  const std::string csv =
      comment_header(c) + "# lookback and patch_scales above are overridden per row\n" + sweep_csv(rows);
  write_text(out / "sweep.csv", csv);
  std::cout << csv;
  return kOk;
}

void apply_thread_cap() {
  if (const char* v = std::getenv("FTMIX_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

int fail(const char* kind, const std::string& msg, int code) {
  std::string line = msg;
  for (auto& ch : line) {
    if (ch == '\n') ch = ' ';
  }
  std::cerr << "error[" << kind << "]: " << line << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FTMixer time-series forecasting"};
  app.require_subcommand(1);
  Flags f;

  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint, report and loss CSV");
  add_common(train_cmd, f);
  add_model_train(train_cmd, f);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint; prints metrics JSON");
  add_common(eval_cmd, f);
  eval_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file");
  eval_cmd->add_option("--split", f.split, "train | val | test");
  eval_cmd->add_option("--ablation", f.ablation, "Branch configuration the checkpoint was trained with");

  auto* predict_cmd = app.add_subcommand("predict", "Forecast one window; prints channel,step,predicted,actual CSV");
  add_common(predict_cmd, f);
  predict_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file");
  predict_cmd->add_option("--split", f.split, "Split whose first window is used by default");
  predict_cmd->add_option("--start", f.start, "Absolute start index of the input window");
  predict_cmd->add_option("--ablation", f.ablation, "Branch configuration the checkpoint was trained with");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "DCT coefficients of one window; prints k,coefficient CSV");
  add_common(spectrum_cmd, f);
  spectrum_cmd->add_option("--channel", f.channel, "Channel index");
  spectrum_cmd->add_option("--start", f.start, "Window start index");
  spectrum_cmd->add_option("--len", f.len, "Window length (default: lookback)");
  spectrum_cmd->add_option("--lookback", f.lookback, "Default window length");

  auto* sweep_cmd = app.add_subcommand("sweep", "Train one model per lookback; prints a lookback,mse,mae table");
  add_common(sweep_cmd, f);
  add_model_train(sweep_cmd, f);
  sweep_cmd->add_option("--lengths", f.lengths, "Comma-separated lookbacks, e.g. 96,192,336,720");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("config", e.what(), kConfig);
  }

  apply_thread_cap();
  try {
    if (train_cmd->parsed()) return cmd_train(f);
    if (eval_cmd->parsed()) return cmd_eval(f);
    if (predict_cmd->parsed()) return cmd_predict(f);
    if (spectrum_cmd->parsed()) return cmd_spectrum(f);
    if (sweep_cmd->parsed()) return cmd_sweep(f);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), kConfig);
  } catch (const NumericError& e) {
    return fail("numeric", e.what(), kNumeric);
  } catch (const DataError& e) {
    return fail("data", e.what(), kData);
  } catch (const DimensionError& e) {
    return fail("data", e.what(), kData);
  } catch (const ContractError& e) {
    return fail("data", e.what(), kData);
  } catch (const std::exception& e) {
    return fail("config", e.what(), kConfig);
  }
  return kConfig;
}
