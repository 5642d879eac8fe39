// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "linksense/harness/bench.hpp"
#include "linksense/harness/evaluate.hpp"
#include "linksense/sim/csd_file.hpp"

namespace linksense::harness {

// Directory-level entry points behind the CLI subcommands. A dataset
// directory is self-describing (manifest.json); a model directory carries
// train_summary.json with the case, network id and preprocessing geometry
// used at training time.

void run_generate(const HarnessConfig& config, const std::filesystem::path& out_dir,
                  std::uint64_t seed, bool virtual_samples);

sim::Environment env_from_dir(const std::filesystem::path& data_dir);

enum class Split { kTrain, kTest };

FeatureSet features_from_dir(const std::filesystem::path& data_dir,
                             const HarnessConfig& config, Split split, int threads);

TrainResult run_train(const HarnessConfig& config,
                      const std::filesystem::path& data_dir, int case_id,
                      int cnn_id, const std::filesystem::path& out_dir,
                      int epochs_override, std::uint64_t seed);

// Reads case/cnn/geometry from the model directory; case_id must match the
// trained case.
Report run_eval(const HarnessConfig& config, const std::filesystem::path& model_dir,
                const std::filesystem::path& data_dir, int case_id,
                const std::filesystem::path& report_path);

BenchReport run_bench(const HarnessConfig& config,
                      const std::filesystem::path& model_dir,
                      const std::filesystem::path& data_dir, int case_id,
                      const std::filesystem::path& report_path);

}  // namespace linksense::harness
