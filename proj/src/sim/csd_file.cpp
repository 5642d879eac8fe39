// SPDX-License-Identifier: Apache-2.0
#include "linksense/sim/csd_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "linksense/common.hpp"
#include "linksense/parallel.hpp"

namespace linksense::sim {

namespace {

using ordered_json = nlohmann::ordered_json;

void put_u32(std::FILE* f, std::uint32_t v) {
  std::array<unsigned char, 4> b = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff)};
  std::fwrite(b.data(), 1, 4, f);
}

void put_u64(std::FILE* f, std::uint64_t v) {
  put_u32(f, static_cast<std::uint32_t>(v & 0xffffffffULL));
  put_u32(f, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::FILE* f, const char* what) {
  std::array<unsigned char, 4> b;
  if (std::fread(b.data(), 1, 4, f) != 4) {
    throw FormatError(std::string("CSD1: truncated reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::FILE* f, const char* what) {
  const std::uint64_t lo = get_u32(f, what);
  const std::uint64_t hi = get_u32(f, what);
  return lo | (hi << 32);
}

void put_f32_block(std::FILE* f, const float* data, std::size_t count) {
  // Complex payload is written as raw IEEE-754 little-endian words.
  static_assert(sizeof(float) == 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::fwrite(data, 4, count, f);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t v;
      std::memcpy(&v, &data[i], 4);
      put_u32(f, v);
    }
  }
}

void get_f32_block(std::FILE* f, float* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    if (std::fread(data, 4, count, f) != count) {
      throw FormatError("CSD1: truncated sample payload");
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t v = get_u32(f, "payload");
      std::memcpy(&data[i], &v, 4);
    }
  }
}

ordered_json vec2_json(const Vec2& v) { return ordered_json{{"x", v.x}, {"y", v.y}}; }

Vec2 vec2_from(const ordered_json& j) { return Vec2{j.at("x"), j.at("y")}; }

ordered_json env_config_json(const EnvironmentConfig& c) {
  ordered_json j;
  j["num_aps"] = c.num_aps;
  j["num_rxs"] = c.num_rxs;
  j["tx_antennas"] = c.tx_antennas;
  j["rx_antennas"] = c.rx_antennas;
  j["carrier_freq"] = c.carrier_freq;
  j["bandwidth"] = c.bandwidth;
  j["num_subcarriers"] = c.num_subcarriers;
  j["sample_rate"] = c.sample_rate;
  j["sample_duration"] = c.sample_duration;
  j["noise_floor"] = c.noise_floor;
  j["relevance_threshold"] = c.relevance_threshold;
  j["reflection_gain"] = c.reflection_gain;
  j["ap_positions"] = ordered_json::array();
  for (const auto& p : c.ap_positions) j["ap_positions"].push_back(vec2_json(p));
  j["rx_positions"] = ordered_json::array();
  for (const auto& p : c.rx_positions) j["rx_positions"].push_back(vec2_json(p));
  return j;
}

EnvironmentConfig env_config_from(const ordered_json& j) {
  EnvironmentConfig c;
  c.num_aps = j.at("num_aps");
  c.num_rxs = j.at("num_rxs");
  c.tx_antennas = j.at("tx_antennas");
  c.rx_antennas = j.at("rx_antennas");
  c.carrier_freq = j.at("carrier_freq");
  c.bandwidth = j.at("bandwidth");
  c.num_subcarriers = j.at("num_subcarriers");
  c.sample_rate = j.at("sample_rate");
  c.sample_duration = j.at("sample_duration");
  c.noise_floor = j.at("noise_floor");
  c.relevance_threshold = j.at("relevance_threshold");
  c.reflection_gain = j.at("reflection_gain");
  for (const auto& p : j.at("ap_positions")) c.ap_positions.push_back(vec2_from(p));
  for (const auto& p : j.at("rx_positions")) c.rx_positions.push_back(vec2_from(p));
  return c;
}

}  // namespace

CsdWriter::CsdWriter(const std::filesystem::path& path, int links,
                     int antenna_pairs, int subcarriers, int time_len,
                     std::uint32_t sample_count)
    : path_(path),
      links_(links),
      antenna_pairs_(antenna_pairs),
      subcarriers_(subcarriers),
      time_len_(time_len),
      declared_count_(sample_count) {
  if (links < 1 || links > 8) {
    throw FormatError("CSD1: link count " + std::to_string(links) +
                      " outside the 1..8 bitfield range");
  }
  file_ = std::fopen(path.string().c_str(), "wb");
  if (!file_) throw FormatError("CSD1: cannot open " + path.string() + " for write");
  std::fwrite("CSD1", 1, 4, file_);
  put_u32(file_, kCsdVersion);
  put_u32(file_, static_cast<std::uint32_t>(links));
  put_u32(file_, static_cast<std::uint32_t>(antenna_pairs));
  put_u32(file_, static_cast<std::uint32_t>(subcarriers));
  put_u32(file_, static_cast<std::uint32_t>(time_len));
  put_u32(file_, sample_count);
}

CsdWriter::~CsdWriter() {
  if (file_) std::fclose(file_);
}

void CsdWriter::append(const CsiSample& sample) {
  if (!file_) throw FormatError("CSD1: writer already closed");
  if (sample.links != links_ || sample.antenna_pairs != antenna_pairs_ ||
      sample.subcarriers != subcarriers_ || sample.time_len != time_len_) {
    throw FormatError("CSD1: sample shape does not match file header");
  }
  if (written_ >= declared_count_) {
    throw FormatError("CSD1: more samples appended than declared");
  }
  unsigned char head[3];
  head[0] = static_cast<unsigned char>(static_cast<int>(sample.activity));
  head[1] = static_cast<unsigned char>(sample.location);
  unsigned char mask = 0;
  for (int l = 0; l < links_; ++l) {
    if (sample.informative_mask[static_cast<std::size_t>(l)]) {
      mask |= static_cast<unsigned char>(1u << l);
    }
  }
  head[2] = mask;
  std::fwrite(head, 1, 3, file_);
  put_u64(file_, sample.seed);
  put_f32_block(file_, reinterpret_cast<const float*>(sample.csi.data()),
                sample.csi.size() * 2);
  ++written_;
}

void CsdWriter::close() {
  if (!file_) return;
  if (written_ != declared_count_) {
    std::fclose(file_);
    file_ = nullptr;
    throw FormatError("CSD1: wrote " + std::to_string(written_) + " of " +
                      std::to_string(declared_count_) + " declared samples");
  }
  std::fflush(file_);
  std::fclose(file_);
  file_ = nullptr;
}

CsdReader::CsdReader(const std::filesystem::path& path) : path_(path) {
  file_ = std::fopen(path.string().c_str(), "rb");
  if (!file_) throw FormatError("CSD1: cannot open " + path.string());
  char magic[4];
  if (std::fread(magic, 1, 4, file_) != 4 || std::memcmp(magic, "CSD1", 4) != 0) {
    throw FormatError("CSD1: bad magic in " + path.string());
  }
  const std::uint32_t version = get_u32(file_, "version");
  if (version != kCsdVersion) {
    throw FormatError("CSD1: unsupported version " + std::to_string(version));
  }
  links_ = static_cast<int>(get_u32(file_, "links"));
  antenna_pairs_ = static_cast<int>(get_u32(file_, "antenna_pairs"));
  subcarriers_ = static_cast<int>(get_u32(file_, "subcarriers"));
  time_len_ = static_cast<int>(get_u32(file_, "time_len"));
  sample_count_ = get_u32(file_, "sample_count");
  if (links_ < 1 || links_ > 8 || antenna_pairs_ < 1 || subcarriers_ < 1 ||
      time_len_ < 1) {
    throw FormatError("CSD1: invalid header dimensions in " + path.string());
  }
  header_bytes_ = std::ftell(file_);
  sample_bytes_ = 3 + 8 +
                  static_cast<std::size_t>(links_) * antenna_pairs_ *
                      subcarriers_ * time_len_ * 8;
}

CsdReader::~CsdReader() {
  if (file_) std::fclose(file_);
}

CsiSample CsdReader::read(std::uint32_t index) const {
  if (index >= sample_count_) {
    throw FormatError("CSD1: sample index " + std::to_string(index) +
                      " out of range");
  }
  if (std::fseek(file_,
                 header_bytes_ + static_cast<long>(sample_bytes_ * index),
                 SEEK_SET) != 0) {
    throw FormatError("CSD1: seek failed in " + path_.string());
  }
  CsiSample s;
  s.links = links_;
  s.antenna_pairs = antenna_pairs_;
  s.subcarriers = subcarriers_;
  s.time_len = time_len_;
  unsigned char head[3];
  if (std::fread(head, 1, 3, file_) != 3) {
    throw FormatError("CSD1: truncated sample header");
  }
  if (head[0] >= kNumActivities) {
    throw FormatError("CSD1: invalid activity id " + std::to_string(head[0]));
  }
  s.activity = static_cast<Activity>(head[0]);
  s.location = head[1];
  s.informative_mask.assign(static_cast<std::size_t>(links_), 0);
  for (int l = 0; l < links_; ++l) {
    s.informative_mask[static_cast<std::size_t>(l)] =
        (head[2] >> l) & 1u ? 1 : 0;
  }
  s.seed = get_u64(file_, "seed");
  s.csi.resize(static_cast<std::size_t>(links_) * antenna_pairs_ * subcarriers_ *
               time_len_);
  get_f32_block(file_, reinterpret_cast<float*>(s.csi.data()), s.csi.size() * 2);
  return s;
}

void write_dataset_dir(const std::filesystem::path& dir, const Environment& env,
                       const DatasetSpec& spec, bool virtual_samples,
                       int threads) {
  std::filesystem::create_directories(dir);

  ordered_json manifest;
  manifest["format"] = "CSD1";
  manifest["format_version"] = kCsdVersion;
  manifest["virtual_samples"] = virtual_samples;
  manifest["seed"] = spec.seed;
  manifest["activities"] = ordered_json::array();
  for (int a = 0; a < kNumActivities; ++a) {
    manifest["activities"].push_back(
        std::string(activity_name(static_cast<Activity>(a))));
  }
  manifest["environment"] = env_config_json(env.config());
  manifest["locations"] = ordered_json::array();
  for (const auto& p : env.locations()) manifest["locations"].push_back(vec2_json(p));
  manifest["splits"] = {
      {"train", {{"count", spec.train_count}, {"file", "train.csd"}}},
      {"test", {{"count", spec.test_count}, {"file", "test.csd"}}},
  };

  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw FormatError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << "\n";
  }

  if (virtual_samples) return;

  auto write_split = [&](const std::vector<SampleAssignment>& plan,
                         const char* name) {
    CsdWriter writer(dir / name, env.num_links(), env.antenna_pairs(),
                     env.config().num_subcarriers, env.time_samples(),
                     static_cast<std::uint32_t>(plan.size()));
    // Generate in parallel batches but append strictly in order.
    const std::size_t batch = 64;
    std::vector<CsiSample> buf;
    for (std::size_t start = 0; start < plan.size(); start += batch) {
      const std::size_t n = std::min(batch, plan.size() - start);
      buf.assign(n, CsiSample{});
      parallel_for(n, static_cast<std::size_t>(threads), [&](std::size_t i) {
        const SampleAssignment& a = plan[start + i];
        buf[i] = generate_sample(env, ActivityProfile::get(a.activity),
                                 a.location, a.seed);
      });
      for (std::size_t i = 0; i < n; ++i) writer.append(buf[i]);
    }
    writer.close();
  };
  write_split(train_assignments(env, spec), "train.csd");
  write_split(test_assignments(env, spec), "test.csd");
}

DatasetDirInfo read_dataset_manifest(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("cannot open " + manifest_path.string());
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    throw FormatError("bad manifest JSON: " + std::string(e.what()));
  }
  DatasetDirInfo info;
  try {
    info.format = manifest.at("format");
    if (info.format != "CSD1") {
      throw FormatError("unsupported dataset format " + info.format);
    }
    info.virtual_samples = manifest.at("virtual_samples");
    info.env_config = env_config_from(manifest.at("environment"));
    info.spec.seed = manifest.at("seed");
    info.spec.train_count = manifest.at("splits").at("train").at("count");
    info.spec.test_count = manifest.at("splits").at("test").at("count");
  } catch (const ordered_json::exception& e) {
    throw FormatError("manifest missing field: " + std::string(e.what()));
  }
  return info;
}

Dataset load_dataset_dir(const std::filesystem::path& dir, int threads) {
  const DatasetDirInfo info = read_dataset_manifest(dir);
  const Environment env = Environment::build(info.env_config);
  if (info.virtual_samples) {
    return generate_dataset(env, info.spec, threads);
  }
  Dataset ds;
  auto load_split = [&](const char* name, int expect,
                        std::vector<CsiSample>& dst) {
    CsdReader reader(dir / name);
    if (static_cast<int>(reader.sample_count()) != expect) {
      throw FormatError(std::string(name) + ": sample count mismatch vs manifest");
    }
    dst.resize(reader.sample_count());
    for (std::uint32_t i = 0; i < reader.sample_count(); ++i) {
      dst[i] = reader.read(i);
    }
  };
  load_split("train.csd", info.spec.train_count, ds.train);
  load_split("test.csd", info.spec.test_count, ds.test);
  return ds;
}

}  // namespace linksense::sim
