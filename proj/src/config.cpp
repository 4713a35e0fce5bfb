#include "ftmixer/config.hpp"

#include "ftmixer/errors.hpp"
#include "ftmixer/format.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ftmixer {

void CliConfig::set_seed(std::uint64_t seed) {
  model.seed = seed;
  train.seed = seed;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::string>& key_sections() {
  static const std::map<std::string, std::string> keys{
      {"lookback", "model"},        {"horizon", "model"},           {"fcc_embed_dim", "model"},
      {"patch_scales", "model"},    {"patch_embed_dim", "model"},   {"fcc_kernel_size", "model"},
      {"wfc_kernel_size", "model"}, {"ds_dw_kernel_size", "model"}, {"revin_epsilon", "model"},
      {"epochs", "train"},          {"batch_size", "train"},        {"learning_rate", "train"},
      {"patience", "train"},        {"seed", "train"},              {"ablation", "train"},
      {"grad_clip", "train"},       {"path", "data"},               {"output", "data"},
      {"checkpoint", "data"},       {"lengths", "data"},
  };
  return keys;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  auto list = parse_scale_list(key, v);
  if (list.size() != 1) throw ConfigError("config key '" + key + "': expected one integer, got '" + v + "'");
  return list[0];
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  return d;
}

}  // namespace

CliConfig parse_cli_config(const std::string& text) {
  CliConfig c;
  std::map<std::string, std::string> model_kv;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "train" && section != "data") {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = key_sections().find(key);
    if (it == key_sections().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!section.empty() && it->second != section) {
      throw ConfigError(where + "key '" + key + "' belongs in [" + it->second + "], not [" + section + "]");
    }
    if (it->second == "model") {
      model_kv[key] = value;
      if (key == "patch_scales") c.patch_scales_set = true;
    } else if (key == "epochs") {
      c.train.epochs = to_count(key, value);
    } else if (key == "batch_size") {
      c.train.batch_size = to_count(key, value);
    } else if (key == "learning_rate") {
      c.train.learning_rate = to_real(key, value);
    } else if (key == "patience") {
      c.train.patience = to_count(key, value);
    } else if (key == "seed") {
      c.set_seed(to_count(key, value));
    } else if (key == "ablation") {
      c.train.ablation = parse_ablation(value);
    } else if (key == "grad_clip") {
      c.train.grad_clip = to_real(key, value);
    } else if (key == "path") {
      c.data_path = value;
    } else if (key == "output") {
      c.output_dir = value;
    } else if (key == "checkpoint") {
      c.checkpoint = value;
    } else if (key == "lengths") {
      c.lengths = parse_scale_list(key, value);
    }
  }
  const auto seed = c.model.seed;
  c.model = model_config_from_key_values(model_kv);
  c.model.seed = seed;
  return c;
}

CliConfig load_cli_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_cli_config(ss.str());
}

std::string to_config_text(const CliConfig& c) {
  std::ostringstream os;
  os.precision(17);
  const auto& m = c.model;
  std::string scales;
  for (std::size_t i = 0; i < m.patch_scales.size(); ++i) scales += (i ? "," : "") + std::to_string(m.patch_scales[i]);
  std::string lengths;
  for (std::size_t i = 0; i < c.lengths.size(); ++i) lengths += (i ? "," : "") + std::to_string(c.lengths[i]);
  os << "[model]\n"
     << "lookback = " << m.lookback << '\n'
     << "horizon = " << m.horizon << '\n'
     << "fcc_embed_dim = " << m.fcc_embed_dim << '\n'
     << "patch_scales = " << scales << '\n'
     << "patch_embed_dim = " << m.patch_embed_dim << '\n'
     << "fcc_kernel_size = " << m.fcc_kernel_size << '\n'
     << "wfc_kernel_size = " << m.wfc_kernel_size << '\n'
     << "ds_dw_kernel_size = " << m.ds_dw_kernel_size << '\n'
     << "revin_epsilon = " << format_real(m.revin_epsilon) << '\n'
     << "[train]\n"
     << to_key_values(c.train) << "[data]\n"
     << "path = " << c.data_path << '\n'
     << "output = " << c.output_dir << '\n';
  if (!c.checkpoint.empty()) os << "checkpoint = " << c.checkpoint << '\n';
  os << "lengths = " << lengths << '\n';
  return os.str();
}

}  // namespace ftmixer
