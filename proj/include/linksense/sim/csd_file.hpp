// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "linksense/sim/dataset.hpp"

namespace linksense::sim {

// "CSD1" container, little-endian.
//   header: magic "CSD1", u32 version, u32 L, u32 A, u32 S, u32 T,
//           u32 sample_count
//   per sample: u8 activity, u8 location, u8 link-mask bitfield, u64 seed,
//               then L*A*S*T complex values as interleaved float32 (re, im).
// The bitfield limits a file to 8 links; larger deployments need a format
// revision.
inline constexpr std::uint32_t kCsdVersion = 1;

class CsdWriter {
 public:
  CsdWriter(const std::filesystem::path& path, int links, int antenna_pairs,
            int subcarriers, int time_len, std::uint32_t sample_count);
  ~CsdWriter();
  CsdWriter(const CsdWriter&) = delete;
  CsdWriter& operator=(const CsdWriter&) = delete;

  void append(const CsiSample& sample);
  // Flushes and verifies the declared sample count was written.
  void close();

 private:
  std::FILE* file_ = nullptr;
  std::filesystem::path path_;
  int links_, antenna_pairs_, subcarriers_, time_len_;
  std::uint32_t declared_count_;
  std::uint32_t written_ = 0;
};

class CsdReader {
 public:
  explicit CsdReader(const std::filesystem::path& path);
  ~CsdReader();
  CsdReader(const CsdReader&) = delete;
  CsdReader& operator=(const CsdReader&) = delete;

  std::uint32_t sample_count() const { return sample_count_; }
  int links() const { return links_; }
  int antenna_pairs() const { return antenna_pairs_; }
  int subcarriers() const { return subcarriers_; }
  int time_len() const { return time_len_; }

  CsiSample read(std::uint32_t index) const;

 private:
  std::FILE* file_ = nullptr;
  std::filesystem::path path_;
  int links_ = 0, antenna_pairs_ = 0, subcarriers_ = 0, time_len_ = 0;
  std::uint32_t sample_count_ = 0;
  std::size_t sample_bytes_ = 0;
  long header_bytes_ = 0;
};

// Dataset directory: manifest.json plus train.csd/test.csd, or a
// manifest-only "virtual" directory whose samples are regenerated on
// demand from the stored environment and spec.
struct DatasetDirInfo {
  EnvironmentConfig env_config;
  DatasetSpec spec;
  bool virtual_samples = false;
  std::string format = "CSD1";
};

void write_dataset_dir(const std::filesystem::path& dir, const Environment& env,
                       const DatasetSpec& spec, bool virtual_samples,
                       int threads);

DatasetDirInfo read_dataset_manifest(const std::filesystem::path& dir);

// Loads (or regenerates, for virtual directories) both splits.
Dataset load_dataset_dir(const std::filesystem::path& dir, int threads);

}  // namespace linksense::sim
