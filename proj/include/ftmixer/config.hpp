#pragma once

#include "ftmixer/model.hpp"
#include "ftmixer/train.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ftmixer {

/// Everything a CLI invocation runs with: model and training hyperparameters
/// plus paths. Loaded from a config file, then overridden by flags.
///
/// File format: "key = value" lines grouped under [model], [train] and
/// [data] sections; '#' starts a comment. Keys are checked against their
/// section and unknown keys are rejected.
struct CliConfig {
  ModelConfig model;
  TrainConfig train;
  std::string data_path;
  std::string output_dir = "runs";
  std::string checkpoint;
  std::vector<std::size_t> lengths{96, 192, 336, 720};
  /// Patch scales given explicitly (otherwise derived from the lookback).
  bool patch_scales_set = false;
  /// Set the single seed shared by initialization and shuffling.
  void set_seed(std::uint64_t seed);
};

CliConfig parse_cli_config(const std::string& text);
CliConfig load_cli_config(const std::filesystem::path& path);
/// Round-trippable text form; embedded in run artifacts.
std::string to_config_text(const CliConfig& config);

}  // namespace ftmixer
