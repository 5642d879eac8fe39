// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "linksense/agent/agent.hpp"
#include "linksense/harness/config.hpp"
#include "linksense/sim/csi_generator.hpp"

namespace linksense::harness {

// Preprocessed view of one sample: the stacked normalized streams per
// window (agent observation, channels 2*xi = phase-difference, 2*xi+1 =
// amplitude) and the two-channel spectrum image per (window, link)
// (classifier input). Raw CSI is not retained.
struct SampleFeatures {
  std::uint8_t activity = 0;
  std::uint8_t location = 1;
  std::vector<std::uint8_t> informative;
  std::vector<nn::Tensor<float>> obs;                  // [window] of [2L][W]
  std::vector<std::vector<nn::Tensor<float>>> images;  // [window][link] of [2][R][R]
  std::vector<std::uint8_t> degenerate;                // per (window*L + link), bit0 phase, bit1 amp

  agent::EpisodeInput episode_input() const {
    return agent::EpisodeInput{{obs.data(), obs.size()},
                               {images.data(), images.size()},
                               static_cast<int>(activity)};
  }
};

struct FeatureSet {
  int num_links = 0;
  int windows = 0;
  int window_len = 0;
  int image_side = 0;
  std::vector<SampleFeatures> samples;
};

int windows_per_sample(int time_len, int window, int stride);

SampleFeatures build_sample_features(const sim::CsiSample& sample,
                                     const HarnessConfig& config);

FeatureSet build_features(const std::vector<sim::CsiSample>& samples,
                          const HarnessConfig& config, int threads);

// Streamed variant: generates each sample from its assignment, preprocesses
// it and drops the raw CSI, keeping peak memory at one sample per thread.
FeatureSet build_features_streamed(const sim::Environment& env,
                                   const std::vector<sim::SampleAssignment>& plan,
                                   const HarnessConfig& config, int threads);

}  // namespace linksense::harness
