#pragma once

#include "ftmixer/checkpoint.hpp"
#include "ftmixer/diffarray.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ftmixer {

struct ModelConfig {
  std::size_t lookback = 336;
  std::size_t horizon = 96;
  std::size_t channels = 7;
  std::size_t fcc_embed_dim = 128;
  std::vector<std::size_t> patch_scales{24, 48};
  std::size_t patch_embed_dim = 64;
  /// Kernel of the channel-axis convolution in FCC; 0 means "channels".
  std::size_t fcc_kernel_size = 0;
  std::size_t wfc_kernel_size = 3;
  std::size_t ds_dw_kernel_size = 3;
  double revin_epsilon = 1e-5;
  std::uint64_t seed = 2024;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;

  std::size_t effective_fcc_kernel() const { return fcc_kernel_size ? fcc_kernel_size : channels; }
  std::size_t patches_for(std::size_t scale) const { return lookback / scale; }
  /// Patch count summed over all scales.
  std::size_t total_patches() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Scales {24, 48} for long lookbacks, {12, 24} below 192 steps; only
/// divisors of the lookback are kept.
std::vector<std::size_t> default_patch_scales(std::size_t lookback);

/// Flat "key = value" lines, one per field.
std::string to_key_values(const ModelConfig& config);
/// Reads the keys written by to_key_values; missing keys keep their defaults.
ModelConfig model_config_from_key_values(const std::map<std::string, std::string>& kv);
/// Comma-separated list of positive counts, e.g. "24,48".
std::vector<std::size_t> parse_scale_list(const std::string& key, const std::string& text);
/// Parses "key = value" lines (blank lines and '#' comments ignored).
std::map<std::string, std::string> parse_key_value_lines(const std::string& text);

struct WfcScaleParams {
  DiffArray conv_weight;   // [n_s, n_s, K_wfc]: patches as channels, conv over frequency bins
  DiffArray conv_bias;     // [n_s]
  DiffArray embed_weight;  // [w_s, D_p]
  DiffArray embed_bias;    // [D_p]
};

struct FtMixerParams {
  DiffArray fcc_embed_weight;  // [L, D_f]
  DiffArray fcc_embed_bias;    // [D_f]
  DiffArray fcc_conv_weight;   // [D_f, 1, K_fcc]: one kernel over the channel axis per embedded position
  DiffArray fcc_conv_bias;     // [D_f]
  std::vector<WfcScaleParams> wfc;
  DiffArray ds_depthwise_weight;  // [D_p, 1, K_ds]
  DiffArray ds_depthwise_bias;    // [D_p]
  DiffArray ds_pointwise_weight;  // [D_p, D_p, 1]
  DiffArray ds_pointwise_bias;    // [D_p]
  DiffArray ds_proj_weight;       // [P * D_p, D_f]
  DiffArray ds_proj_bias;         // [D_f]
  DiffArray predictor_weight;     // [D_f, horizon]
  DiffArray predictor_bias;       // [horizon]

  /// Uniform in +-1/sqrt(fan_in) per layer, drawn from config.seed.
  static FtMixerParams initialize(const ModelConfig& config);
  static FtMixerParams zeros(const ModelConfig& config);

  /// Parameters in a fixed order with dotted names.
  std::vector<std::pair<std::string, DiffArray>> named() const;
  std::vector<DiffArray> list() const;
  std::size_t count() const;
  /// Deep copy with fresh, gradient-tracking leaves.
  FtMixerParams clone() const;
};

/// Closed-form parameter count for a config.
std::size_t parameter_count(const ModelConfig& config);

Checkpoint make_checkpoint(const ModelConfig& config, const FtMixerParams& params);
std::pair<ModelConfig, FtMixerParams> load_model(const Checkpoint& ckpt);

// ---------------------------------------------------------------------------
// RevIN

/// Per-row statistics of the lookback window. Rows are every leading index
/// combination of the normalized array (channels, or batch x channels).
struct RevinState {
  Eigen::VectorXd mean;
  Eigen::VectorXd stdev;
  /// True where the standard deviation was floored at epsilon.
  std::vector<bool> clamped;
  /// The un-normalized input; lets denormalization carry gradient back to it.
  DiffArray source;

  std::size_t rows() const { return static_cast<std::size_t>(mean.size()); }
};

/// Standardizes each row of X (last axis is time) by its own mean and
/// population standard deviation, the latter floored at epsilon.
std::pair<DiffArray, RevinState> revin_normalize(const DiffArray& x, double epsilon);
/// y * stdev + mean per row.
DiffArray revin_denormalize(const DiffArray& y, const RevinState& state);

// ---------------------------------------------------------------------------
// Blocks. Leading axes are batch-like: [N, L] and [B, N, L] both work.

/// DCT over time, embed L -> D_f, conv along the channel axis at every
/// embedded position, inverse DCT over D_f. [.., N, L] -> [.., N, D_f].
DiffArray fcc_forward(const DiffArray& x, const FtMixerParams& params, const ModelConfig& config);

/// One scale of windowed frequency convolution on independent series.
/// [L] -> [n_s, D_p]; [R, L] -> [R, n_s, D_p].
DiffArray wfc_forward(const DiffArray& x, const FtMixerParams& params, const ModelConfig& config,
                      std::size_t scale_index);

/// Depthwise conv along the patch axis then pointwise 1x1 conv, before the
/// activation. [R, P, D_p] -> [R, D_p, P].
DiffArray ds_mix(const DiffArray& z, const FtMixerParams& params, const ModelConfig& config);

/// Full DS stage: ds_mix, GELU, flatten, project to D_f. [R, P, D_p] -> [R, D_f].
DiffArray ds_conv(const DiffArray& z, const FtMixerParams& params, const ModelConfig& config);

struct ForwardOptions {
  bool use_fcc = true;
  bool use_wfc = true;
};

/// RevIN -> (FCC + DS(concat WFC)) -> linear predictor -> inverse RevIN.
/// [N, L] -> [N, horizon]; [B, N, L] -> [B, N, horizon].
DiffArray ftmixer_forward(const DiffArray& x, const FtMixerParams& params, const ModelConfig& config,
                          ForwardOptions options = {});

}  // namespace ftmixer
