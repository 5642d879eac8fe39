// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/features.hpp"

#include "linksense/dsp/preprocess.hpp"
#include "linksense/parallel.hpp"

namespace linksense::harness {

int windows_per_sample(int time_len, int window, int stride) {
  if (time_len < window) {
    throw DomainError("sample length " + std::to_string(time_len) +
                      " shorter than one analysis window of " +
                      std::to_string(window));
  }
  return (time_len - window) / stride + 1;
}

SampleFeatures build_sample_features(const sim::CsiSample& sample,
                                     const HarnessConfig& config) {
  const int n_links = sample.links;
  const int n_windows = windows_per_sample(sample.time_len, config.window, config.stride);
  const int side = config.image_side;

  SampleFeatures out;
  out.activity = static_cast<std::uint8_t>(static_cast<int>(sample.activity));
  out.location = static_cast<std::uint8_t>(sample.location);
  out.informative = sample.informative_mask;
  out.obs.reserve(static_cast<std::size_t>(n_windows));
  out.images.resize(static_cast<std::size_t>(n_windows));
  out.degenerate.assign(static_cast<std::size_t>(n_windows) * n_links, 0);

  for (int w = 0; w < n_windows; ++w) {
    nn::Tensor<float> obs({2 * n_links, config.window});
    auto& row_images = out.images[static_cast<std::size_t>(w)];
    row_images.reserve(static_cast<std::size_t>(n_links));

    for (int l = 0; l < n_links; ++l) {
      const dsp::StreamPair sp = dsp::preprocess_link(
          sample.link_view(l), w * config.stride, config.window, l);
      for (int t = 0; t < config.window; ++t) {
        obs.data[static_cast<std::size_t>(2 * l) * config.window + t] =
            static_cast<float>(sp.o1[static_cast<std::size_t>(t)]);
        obs.data[static_cast<std::size_t>(2 * l + 1) * config.window + t] =
            static_cast<float>(sp.o2[static_cast<std::size_t>(t)]);
      }
      nn::Tensor<float> img({2, side, side});
      img.data = dsp::stream_dwt_images(sp, config.dwt_levels, side);
      row_images.push_back(std::move(img));

      std::uint8_t flag = 0;
      if (sp.degenerate_phase) flag |= 1;
      if (sp.degenerate_amplitude) flag |= 2;
      out.degenerate[static_cast<std::size_t>(w) * n_links + l] = flag;
    }
    out.obs.push_back(std::move(obs));
  }
  return out;
}

FeatureSet build_features(const std::vector<sim::CsiSample>& samples,
                          const HarnessConfig& config, int threads) {
  FeatureSet fs;
  if (samples.empty()) return fs;
  fs.num_links = samples.front().links;
  fs.window_len = config.window;
  fs.image_side = config.image_side;
  fs.windows = windows_per_sample(samples.front().time_len, config.window,
                                  config.stride);
  fs.samples.resize(samples.size());
  parallel_for(samples.size(), static_cast<std::size_t>(threads), [&](std::size_t i) {
    fs.samples[i] = build_sample_features(samples[i], config);
  });
  return fs;
}

FeatureSet build_features_streamed(const sim::Environment& env,
                                   const std::vector<sim::SampleAssignment>& plan,
                                   const HarnessConfig& config, int threads) {
  FeatureSet fs;
  if (plan.empty()) return fs;
  fs.num_links = env.num_links();
  fs.window_len = config.window;
  fs.image_side = config.image_side;
  fs.windows = windows_per_sample(env.time_samples(), config.window, config.stride);
  fs.samples.resize(plan.size());
  parallel_for(plan.size(), static_cast<std::size_t>(threads), [&](std::size_t i) {
    const sim::SampleAssignment& a = plan[i];
    const sim::CsiSample sample = sim::generate_sample(
        env, sim::ActivityProfile::get(a.activity), a.location, a.seed);
    fs.samples[i] = build_sample_features(sample, config);
  });
  return fs;
}

}  // namespace linksense::harness
