// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

namespace linksense::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value '" + v + "' for " + key);
  }
}

int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x) {
    throw ConfigError("config: expected integer for " + key + ", got '" + v + "'");
  }
  return i;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("config: expected boolean for " + key + ", got '" + v + "'");
}

}  // namespace

void HarnessConfig::validate() const {
  env.validate();
  if (window < 4) throw ConfigError("config: window must be >= 4");
  if (stride < 1) throw ConfigError("config: stride must be >= 1");
  if (dwt_levels < 1) throw ConfigError("config: dwt_levels must be >= 1");
  if (window % (1 << dwt_levels) != 0) {
    throw ConfigError("config: window must be divisible by 2^dwt_levels");
  }
  if (image_side < 4) throw ConfigError("config: image_side must be >= 4");
  if (discount < 0.0 || discount > 1.0) {
    throw ConfigError("config: discount must be in [0,1]");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw ConfigError("config: lambda1/lambda2 must be >= 0");
  }
  if (val_fraction < 0.0 || val_fraction > 0.5) {
    throw ConfigError("config: val_fraction must be in [0, 0.5]");
  }
}

void apply_config_entry(HarnessConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "num_aps") c.env.num_aps = parse_int(key, value);
  else if (key == "num_rxs") c.env.num_rxs = parse_int(key, value);
  else if (key == "tx_antennas") c.env.tx_antennas = parse_int(key, value);
  else if (key == "rx_antennas") c.env.rx_antennas = parse_int(key, value);
  else if (key == "carrier_freq") c.env.carrier_freq = parse_double(key, value);
  else if (key == "bandwidth") c.env.bandwidth = parse_double(key, value);
  else if (key == "num_subcarriers") c.env.num_subcarriers = parse_int(key, value);
  else if (key == "sample_rate") c.env.sample_rate = parse_double(key, value);
  else if (key == "sample_duration") c.env.sample_duration = parse_double(key, value);
  else if (key == "noise_floor") c.env.noise_floor = parse_double(key, value);
  else if (key == "relevance_threshold") c.env.relevance_threshold = parse_double(key, value);
  else if (key == "reflection_gain") c.env.reflection_gain = parse_double(key, value);
  else if (key == "train_count") c.train_count = parse_int(key, value);
  else if (key == "test_count") c.test_count = parse_int(key, value);
  else if (key == "window") c.window = parse_int(key, value);
  else if (key == "stride") c.stride = parse_int(key, value);
  else if (key == "dwt_levels") c.dwt_levels = parse_int(key, value);
  else if (key == "image_side") c.image_side = parse_int(key, value);
  else if (key == "lambda1") c.lambda1 = parse_double(key, value);
  else if (key == "lambda2") c.lambda2 = parse_double(key, value);
  else if (key == "discount") c.discount = parse_double(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_double(key, value);
  else if (key == "batch_size") c.batch_size = parse_int(key, value);
  else if (key == "epochs") c.epochs = parse_int(key, value);
  else if (key == "epsilon") c.epsilon = parse_double(key, value);
  else if (key == "threads") c.threads = parse_int(key, value);
  else if (key == "early_stop") c.early_stop = parse_bool(key, value);
  else if (key == "early_stop_patience") c.early_stop_patience = parse_int(key, value);
  else if (key == "val_fraction") c.val_fraction = parse_double(key, value);
  else if (key == "dump_images") c.dump_images = parse_bool(key, value);
  else if (key == "expected_case1_accuracy") c.expected_case1_accuracy = parse_double(key, value);
  else if (key == "returns_mode") {
    if (value == "trailing") c.returns_mode = agent::ReturnsMode::kTrailing;
    else if (value == "forward") c.returns_mode = agent::ReturnsMode::kForward;
    else throw ConfigError("config: returns_mode must be 'trailing' or 'forward'");
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

HarnessConfig parse_config_text(const std::string& text) {
  HarnessConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    apply_config_entry(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

HarnessConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

nn::HyperParams resolve_hyper(const HarnessConfig& c, int case_id) {
  if (case_id < 1 || case_id > 5) {
    throw ConfigError("case id must be in 1..5, got " + std::to_string(case_id));
  }
  const bool joint = case_id == 1 || case_id == 5;
  nn::HyperParams h = joint ? nn::HyperParams::joint_defaults()
                            : nn::HyperParams::supervised_defaults();
  h.lambda1 = c.lambda1;
  h.lambda2 = c.lambda2;
  h.discount = c.discount;
  h.epsilon = c.epsilon;
  if (c.learning_rate > 0) h.lr = c.learning_rate;
  if (c.batch_size > 0) h.batch_size = c.batch_size;
  if (c.epochs > 0) h.epochs = c.epochs;
  h.validate();
  return h;
}

int resolve_threads(const HarnessConfig& c) {
  if (c.threads > 0) return c.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace linksense::harness
