#include "ftmixer/model.hpp"

#include "ftmixer/errors.hpp"
#include "ftmixer/format.hpp"
#include "ftmixer/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ftmixer {

// ---------------------------------------------------------------------------
// Config

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (lookback < 2) fail("lookback must be at least 2");
  if (horizon < 1) fail("horizon must be at least 1");
  if (channels < 1) fail("channels must be at least 1");
  if (fcc_embed_dim < 1 || patch_embed_dim < 1) fail("embedding dims must be at least 1");
  if (wfc_kernel_size < 1 || ds_dw_kernel_size < 1) fail("kernel sizes must be at least 1");
  if (!(revin_epsilon > 0.0)) fail("revin_epsilon must be positive");
  if (patch_scales.empty()) fail("at least one patch scale is required");
  for (auto w : patch_scales) {
    if (w < 1 || w > lookback || lookback % w != 0) {
      fail("patch scale " + std::to_string(w) + " does not divide lookback " + std::to_string(lookback));
    }
  }
}

std::size_t ModelConfig::total_patches() const {
  std::size_t p = 0;
  for (auto w : patch_scales) p += lookback / w;
  return p;
}

std::vector<std::size_t> default_patch_scales(std::size_t lookback) {
  const std::vector<std::size_t> candidates =
      lookback >= 192 ? std::vector<std::size_t>{24, 48} : std::vector<std::size_t>{12, 24};
  std::vector<std::size_t> out;
  for (auto w : candidates) {
    if (w <= lookback && lookback % w == 0) out.push_back(w);
  }
  if (out.empty()) out.push_back(lookback);
  return out;
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || v[0] == '-') {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(n);
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::size_t> parse_scale_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_count(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string to_key_values(const ModelConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "lookback = " << c.lookback << '\n'
     << "horizon = " << c.horizon << '\n'
     << "channels = " << c.channels << '\n'
     << "fcc_embed_dim = " << c.fcc_embed_dim << '\n'
     << "patch_scales = " << join(c.patch_scales) << '\n'
     << "patch_embed_dim = " << c.patch_embed_dim << '\n'
     << "fcc_kernel_size = " << c.fcc_kernel_size << '\n'
     << "wfc_kernel_size = " << c.wfc_kernel_size << '\n'
     << "ds_dw_kernel_size = " << c.ds_dw_kernel_size << '\n'
     << "revin_epsilon = " << format_real(c.revin_epsilon) << '\n'
     << "seed = " << c.seed << '\n';
  return os.str();
}

std::map<std::string, std::string> parse_key_value_lines(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

ModelConfig model_config_from_key_values(const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  for (const auto& [k, v] : kv) {
    if (k == "lookback") c.lookback = to_count(k, v);
    else if (k == "horizon") c.horizon = to_count(k, v);
    else if (k == "channels") c.channels = to_count(k, v);
    else if (k == "fcc_embed_dim") c.fcc_embed_dim = to_count(k, v);
    else if (k == "patch_scales") c.patch_scales = parse_scale_list(k, v);
    else if (k == "patch_embed_dim") c.patch_embed_dim = to_count(k, v);
    else if (k == "fcc_kernel_size") c.fcc_kernel_size = to_count(k, v);
    else if (k == "wfc_kernel_size") c.wfc_kernel_size = to_count(k, v);
    else if (k == "ds_dw_kernel_size") c.ds_dw_kernel_size = to_count(k, v);
    else if (k == "revin_epsilon") c.revin_epsilon = to_real(k, v);
    else if (k == "seed") c.seed = to_count(k, v);
    else throw ConfigError("unknown model config key '" + k + "'");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

struct Initializer {
  std::mt19937_64 rng;

  DiffArray uniform(Shape shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> v(shape_size(shape));
    for (auto& x : v) x = dist(rng);
    return DiffArray(std::move(shape), std::move(v), true);
  }
};

template <typename Make>
FtMixerParams build(const ModelConfig& c, Make make) {
  c.validate();
  const std::size_t df = c.fcc_embed_dim;
  const std::size_t dp = c.patch_embed_dim;
  const std::size_t kf = c.effective_fcc_kernel();
  FtMixerParams p;
  p.fcc_embed_weight = make(Shape{c.lookback, df}, c.lookback);
  p.fcc_embed_bias = make(Shape{df}, c.lookback);
  p.fcc_conv_weight = make(Shape{df, 1, kf}, kf);
  p.fcc_conv_bias = make(Shape{df}, kf);
  for (auto w : c.patch_scales) {
    const std::size_t n = c.lookback / w;
    WfcScaleParams s;
    s.conv_weight = make(Shape{n, n, c.wfc_kernel_size}, n * c.wfc_kernel_size);
    s.conv_bias = make(Shape{n}, n * c.wfc_kernel_size);
    s.embed_weight = make(Shape{w, dp}, w);
    s.embed_bias = make(Shape{dp}, w);
    p.wfc.push_back(std::move(s));
  }
  p.ds_depthwise_weight = make(Shape{dp, 1, c.ds_dw_kernel_size}, c.ds_dw_kernel_size);
  p.ds_depthwise_bias = make(Shape{dp}, c.ds_dw_kernel_size);
  p.ds_pointwise_weight = make(Shape{dp, dp, 1}, dp);
  p.ds_pointwise_bias = make(Shape{dp}, dp);
  const std::size_t flat = c.total_patches() * dp;
  p.ds_proj_weight = make(Shape{flat, df}, flat);
  p.ds_proj_bias = make(Shape{df}, flat);
  p.predictor_weight = make(Shape{df, c.horizon}, df);
  p.predictor_bias = make(Shape{c.horizon}, df);
  return p;
}

}  // namespace

FtMixerParams FtMixerParams::initialize(const ModelConfig& config) {
  Initializer init{std::mt19937_64(config.seed)};
  return build(config, [&](Shape s, std::size_t fan_in) { return init.uniform(std::move(s), fan_in); });
}

FtMixerParams FtMixerParams::zeros(const ModelConfig& config) {
  return build(config, [](Shape s, std::size_t) { return DiffArray::zeros(std::move(s), true); });
}

std::vector<std::pair<std::string, DiffArray>> FtMixerParams::named() const {
  std::vector<std::pair<std::string, DiffArray>> out{
      {"fcc.embed.weight", fcc_embed_weight},
      {"fcc.embed.bias", fcc_embed_bias},
      {"fcc.conv.weight", fcc_conv_weight},
      {"fcc.conv.bias", fcc_conv_bias},
  };
  for (std::size_t i = 0; i < wfc.size(); ++i) {
    const std::string prefix = "wfc." + std::to_string(i) + ".";
    out.emplace_back(prefix + "conv.weight", wfc[i].conv_weight);
    out.emplace_back(prefix + "conv.bias", wfc[i].conv_bias);
    out.emplace_back(prefix + "embed.weight", wfc[i].embed_weight);
    out.emplace_back(prefix + "embed.bias", wfc[i].embed_bias);
  }
  out.emplace_back("ds.depthwise.weight", ds_depthwise_weight);
  out.emplace_back("ds.depthwise.bias", ds_depthwise_bias);
  out.emplace_back("ds.pointwise.weight", ds_pointwise_weight);
  out.emplace_back("ds.pointwise.bias", ds_pointwise_bias);
  out.emplace_back("ds.proj.weight", ds_proj_weight);
  out.emplace_back("ds.proj.bias", ds_proj_bias);
  out.emplace_back("predictor.weight", predictor_weight);
  out.emplace_back("predictor.bias", predictor_bias);
  return out;
}

std::vector<DiffArray> FtMixerParams::list() const {
  std::vector<DiffArray> out;
  for (auto& [name, a] : named()) out.push_back(a);
  return out;
}

std::size_t FtMixerParams::count() const {
  std::size_t n = 0;
  for (auto& [name, a] : named()) n += a.size();
  return n;
}

FtMixerParams FtMixerParams::clone() const {
  auto copy = [](const DiffArray& a) {
    return DiffArray(a.shape(), std::vector<double>(a.values().begin(), a.values().end()), true);
  };
  FtMixerParams p = *this;
  p.fcc_embed_weight = copy(fcc_embed_weight);
  p.fcc_embed_bias = copy(fcc_embed_bias);
  p.fcc_conv_weight = copy(fcc_conv_weight);
  p.fcc_conv_bias = copy(fcc_conv_bias);
  for (auto& s : p.wfc) {
    s.conv_weight = copy(s.conv_weight);
    s.conv_bias = copy(s.conv_bias);
    s.embed_weight = copy(s.embed_weight);
    s.embed_bias = copy(s.embed_bias);
  }
  p.ds_depthwise_weight = copy(ds_depthwise_weight);
  p.ds_depthwise_bias = copy(ds_depthwise_bias);
  p.ds_pointwise_weight = copy(ds_pointwise_weight);
  p.ds_pointwise_bias = copy(ds_pointwise_bias);
  p.ds_proj_weight = copy(ds_proj_weight);
  p.ds_proj_bias = copy(ds_proj_bias);
  p.predictor_weight = copy(predictor_weight);
  p.predictor_bias = copy(predictor_bias);
  return p;
}

std::size_t parameter_count(const ModelConfig& c) {
  const std::size_t df = c.fcc_embed_dim;
  const std::size_t dp = c.patch_embed_dim;
  std::size_t n = c.lookback * df + df;             // FCC embedding
  n += df * c.effective_fcc_kernel() + df;           // FCC channel conv
  for (auto w : c.patch_scales) {
    const std::size_t p = c.lookback / w;
    n += p * p * c.wfc_kernel_size + p;              // WFC bin conv
    n += w * dp + dp;                                // WFC embedding
  }
  n += dp * c.ds_dw_kernel_size + dp;                // depthwise
  n += dp * dp + dp;                                 // pointwise
  n += c.total_patches() * dp * df + df;             // projection to D_f
  n += df * c.horizon + c.horizon;                   // predictor
  return n;
}

Checkpoint make_checkpoint(const ModelConfig& config, const FtMixerParams& params) {
  Checkpoint ckpt;
  ckpt.metadata = to_key_values(config);
  for (const auto& [name, a] : params.named()) {
    ckpt.entries.push_back({name, a.shape(), std::vector<double>(a.values().begin(), a.values().end())});
  }
  return ckpt;
}

std::pair<ModelConfig, FtMixerParams> load_model(const Checkpoint& ckpt) {
  ModelConfig config = model_config_from_key_values(parse_key_value_lines(ckpt.metadata));
  FtMixerParams params = FtMixerParams::zeros(config);
  for (auto& [name, a] : params.named()) {
    const auto* e = ckpt.find(name);
    if (!e) throw ParseError("checkpoint is missing parameter '" + name + "'");
    if (e->shape != a.shape()) {
      throw DimensionError("checkpoint parameter '" + name + "' has shape " + shape_string(e->shape) +
                           ", config expects " + shape_string(a.shape()));
    }
    auto dst = a.values_mut();
    std::copy(e->values.begin(), e->values.end(), dst.begin());
  }
  if (ckpt.entries.size() != params.named().size()) {
    throw ParseError("checkpoint holds " + std::to_string(ckpt.entries.size()) + " arrays, config expects " +
                     std::to_string(params.named().size()));
  }
  return {config, std::move(params)};
}

// ---------------------------------------------------------------------------
// RevIN

std::pair<DiffArray, RevinState> revin_normalize(const DiffArray& x, double epsilon) {
  if (!x.defined() || x.rank() == 0) throw ContractError("revin_normalize: empty input");
  const std::size_t len = x.shape().back();
  if (len < 2) throw ContractError("revin_normalize: need at least 2 time steps");
  const std::size_t rows = x.size() / len;

  RevinState state;
  state.mean.resize(static_cast<Eigen::Index>(rows));
  state.stdev.resize(static_cast<Eigen::Index>(rows));
  state.clamped.assign(rows, false);
  state.source = x;

  auto xv = x.values();
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * len;
    double mu = 0.0;
    for (std::size_t t = 0; t < len; ++t) mu += row[t];
    mu /= static_cast<double>(len);
    double var = 0.0;
    for (std::size_t t = 0; t < len; ++t) var += (row[t] - mu) * (row[t] - mu);
    var /= static_cast<double>(len);
    double sd = std::sqrt(var);
    if (sd < epsilon) {
      sd = epsilon;
      state.clamped[r] = true;
    }
    state.mean[static_cast<Eigen::Index>(r)] = mu;
    state.stdev[static_cast<Eigen::Index>(r)] = sd;
    for (std::size_t t = 0; t < len; ++t) out[r * len + t] = (row[t] - mu) / sd;
  }

  const auto stdev = state.stdev;
  const auto clamped = state.clamped;
  auto y = detail::make_result(x.shape(), std::move(out), {x.node()},
                               [rows, len, stdev, clamped](detail::Node& self) {
                                 auto& gx = self.parents[0]->ensure_grad();
                                 const double n = static_cast<double>(len);
                                 for (std::size_t r = 0; r < rows; ++r) {
                                   const double* g = self.grad.data() + r * len;
                                   const double* y = self.values.data() + r * len;
                                   double g_mean = 0.0;
                                   double gy_mean = 0.0;
                                   for (std::size_t t = 0; t < len; ++t) {
                                     g_mean += g[t];
                                     gy_mean += g[t] * y[t];
                                   }
                                   g_mean /= n;
                                   gy_mean /= n;
                                   if (clamped[r]) gy_mean = 0.0;
                                   const double inv = 1.0 / stdev[static_cast<Eigen::Index>(r)];
                                   for (std::size_t t = 0; t < len; ++t) {
                                     gx[r * len + t] += inv * (g[t] - g_mean - y[t] * gy_mean);
                                   }
                                 }
                               });
  return {std::move(y), std::move(state)};
}

DiffArray revin_denormalize(const DiffArray& y, const RevinState& state) {
  if (!y.defined() || y.rank() == 0) throw ContractError("revin_denormalize: empty input");
  const std::size_t horizon = y.shape().back();
  const std::size_t rows = y.size() / horizon;
  if (rows != state.rows()) {
    throw ContractError("revin_denormalize: input has " + std::to_string(rows) + " series, state holds " +
                        std::to_string(state.rows()));
  }
  auto yv = y.values();
  std::vector<double> out(y.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double mu = state.mean[static_cast<Eigen::Index>(r)];
    const double sd = state.stdev[static_cast<Eigen::Index>(r)];
    for (std::size_t t = 0; t < horizon; ++t) out[r * horizon + t] = yv[r * horizon + t] * sd + mu;
  }

  std::vector<std::shared_ptr<detail::Node>> parents{y.node()};
  const bool has_source = state.source.defined();
  if (has_source) {
    if (state.source.size() % rows != 0 || state.source.size() / rows < 2) {
      throw ContractError("revin_denormalize: state source does not match the series count");
    }
    parents.push_back(state.source.node());
  }
  const auto mean = state.mean;
  const auto stdev = state.stdev;
  const auto clamped = state.clamped;
  return detail::make_result(
      y.shape(), std::move(out), std::move(parents),
      [rows, horizon, has_source, mean, stdev, clamped](detail::Node& self) {
        auto& py = *self.parents[0];
        const double* g = self.grad.data();
        if (py.requires_grad) {
          auto& gy = py.ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) {
            const double sd = stdev[static_cast<Eigen::Index>(r)];
            for (std::size_t t = 0; t < horizon; ++t) gy[r * horizon + t] += g[r * horizon + t] * sd;
          }
        }
        if (!has_source || !self.parents[1]->requires_grad) return;
        // d out / d x_j = 1/L + y_t (x_j - mu) / (L sd), the second term only when sd is unclamped.
        auto& src = *self.parents[1];
        auto& gx = src.ensure_grad();
        const std::size_t len = src.values.size() / rows;
        const double n = static_cast<double>(len);
        for (std::size_t r = 0; r < rows; ++r) {
          double g_sum = 0.0;
          double gy_sum = 0.0;
          for (std::size_t t = 0; t < horizon; ++t) {
            g_sum += g[r * horizon + t];
            gy_sum += g[r * horizon + t] * py.values[r * horizon + t];
          }
          const double mu = mean[static_cast<Eigen::Index>(r)];
          const double sd = stdev[static_cast<Eigen::Index>(r)];
          const double spread = clamped[r] ? 0.0 : gy_sum / (n * sd);
          for (std::size_t j = 0; j < len; ++j) {
            gx[r * len + j] += g_sum / n + spread * (src.values[r * len + j] - mu);
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Blocks

namespace {

Shape leading(const DiffArray& x) {
  return Shape(x.shape().begin(), x.shape().end() - 1);
}

Shape with_last(Shape lead, std::size_t last) {
  lead.push_back(last);
  return lead;
}

DiffArray linear(const DiffArray& x2d, const DiffArray& weight, const DiffArray& bias) {
  return add(matmul(x2d, weight), bias);
}

}  // namespace

DiffArray fcc_forward(const DiffArray& x, const FtMixerParams& params, const ModelConfig& config) {
  if (x.rank() != 2 && x.rank() != 3) {
    throw DimensionError("fcc_forward: expected [N, L] or [B, N, L], got " + shape_string(x.shape()));
  }
  const std::size_t n = x.shape()[x.rank() - 2];
  const std::size_t len = x.shape().back();
  if (n != config.channels || len != config.lookback) {
    throw DimensionError("fcc_forward: input " + shape_string(x.shape()) + " does not match config N=" +
                         std::to_string(config.channels) + ", L=" + std::to_string(config.lookback));
  }
  const std::size_t batch = x.rank() == 3 ? x.dim(0) : 1;
  const std::size_t df = config.fcc_embed_dim;

  auto spectrum = dct_last(reshape(x, {batch * n, len}));
  auto embedded = linear(spectrum, params.fcc_embed_weight, params.fcc_embed_bias);
  // Channels become the sequence axis; each embedded position is its own conv channel.
  auto along_channels = transpose_last2(reshape(embedded, {batch, n, df}));
  auto mixed = conv1d(along_channels, params.fcc_conv_weight, params.fcc_conv_bias,
                      {Padding::Same, df});
  auto out = idct_last(transpose_last2(mixed));
  return reshape(out, with_last(leading(x), df));
}

DiffArray wfc_forward(const DiffArray& x, const FtMixerParams& params, const ModelConfig& config,
                      std::size_t scale_index) {
  if (scale_index >= config.patch_scales.size() || scale_index >= params.wfc.size()) {
    throw ContractError("wfc_forward: scale index " + std::to_string(scale_index) + " out of range");
  }
  if (x.rank() != 1 && x.rank() != 2) {
    throw DimensionError("wfc_forward: expected [L] or [R, L], got " + shape_string(x.shape()));
  }
  const std::size_t len = x.shape().back();
  const std::size_t w = config.patch_scales[scale_index];
  if (w == 0 || len % w != 0) {
    throw ConfigError("wfc_forward: window " + std::to_string(w) + " does not divide length " +
                      std::to_string(len));
  }
  if (len != config.lookback) {
    throw DimensionError("wfc_forward: series length " + std::to_string(len) + " != lookback " +
                         std::to_string(config.lookback));
  }
  const std::size_t rows = x.rank() == 2 ? x.dim(0) : 1;
  const std::size_t patches = len / w;
  const std::size_t dp = config.patch_embed_dim;
  const auto& p = params.wfc[scale_index];

  auto raw = reshape(x, {rows, patches, w});
  auto spectra = dct_last(raw);
  auto mixed = conv1d(spectra, p.conv_weight, p.conv_bias, {Padding::Same, 1});
  auto restored = add(idct_last(mixed), raw);
  auto embedded = linear(reshape(restored, {rows * patches, w}), p.embed_weight, p.embed_bias);
  if (x.rank() == 1) return reshape(embedded, {patches, dp});
  return reshape(embedded, {rows, patches, dp});
}

DiffArray ds_mix(const DiffArray& z, const FtMixerParams& params, const ModelConfig& config) {
  const std::size_t dp = config.patch_embed_dim;
  const std::size_t total = config.total_patches();
  if (z.rank() != 3 || z.dim(1) != total || z.dim(2) != dp) {
    throw DimensionError("ds_conv: expected [R, " + std::to_string(total) + ", " + std::to_string(dp) +
                         "], got " + shape_string(z.shape()));
  }
  auto features = transpose_last2(z);  // [R, D_p, P]
  auto depthwise = conv1d(features, params.ds_depthwise_weight, params.ds_depthwise_bias,
                          {Padding::Same, dp});
  return conv1d(depthwise, params.ds_pointwise_weight, params.ds_pointwise_bias, {Padding::Same, 1});
}

DiffArray ds_conv(const DiffArray& z, const FtMixerParams& params, const ModelConfig& config) {
  auto activated = gelu(ds_mix(z, params, config));
  const std::size_t rows = z.dim(0);
  auto flat = reshape(activated, {rows, config.total_patches() * config.patch_embed_dim});
  return linear(flat, params.ds_proj_weight, params.ds_proj_bias);
}

DiffArray ftmixer_forward(const DiffArray& x, const FtMixerParams& params, const ModelConfig& config,
                          ForwardOptions options) {
  if (x.rank() != 2 && x.rank() != 3) {
    throw DimensionError("ftmixer_forward: expected [N, L] or [B, N, L], got " + shape_string(x.shape()));
  }
  if (!options.use_fcc && !options.use_wfc) {
    throw ConfigError("ftmixer_forward: at least one of FCC and WFC must be enabled");
  }
  const std::size_t n = x.shape()[x.rank() - 2];
  const std::size_t len = x.shape().back();
  if (n != config.channels || len != config.lookback) {
    throw DimensionError("ftmixer_forward: input " + shape_string(x.shape()) + " does not match config N=" +
                         std::to_string(config.channels) + ", L=" + std::to_string(config.lookback));
  }
  const std::size_t batch = x.rank() == 3 ? x.dim(0) : 1;
  const std::size_t rows = batch * n;

  auto [normalized, state] = revin_normalize(x, config.revin_epsilon);

  DiffArray z;
  if (options.use_fcc) {
    z = reshape(fcc_forward(normalized, params, config), {rows, config.fcc_embed_dim});
  }
  if (options.use_wfc) {
    auto series = reshape(normalized, {rows, len});
    std::vector<DiffArray> scales;
    for (std::size_t s = 0; s < config.patch_scales.size(); ++s) {
      scales.push_back(wfc_forward(series, params, config, s));
    }
    auto z_ds = ds_conv(concat(scales, 1), params, config);
    z = z.defined() ? add(z, z_ds) : z_ds;
  }

  auto prediction = linear(z, params.predictor_weight, params.predictor_bias);
  auto shaped = reshape(prediction, with_last(leading(x), config.horizon));
  return revin_denormalize(shaped, state);
}

}  // namespace ftmixer
