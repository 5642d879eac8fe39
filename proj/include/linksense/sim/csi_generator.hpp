// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "linksense/dsp/preprocess.hpp"
#include "linksense/sim/activity.hpp"
#include "linksense/sim/environment.hpp"

namespace linksense::sim {

// One labelled CSI capture: complex tensor [links][antenna_pairs]
// [subcarriers][time] plus the planted per-link relevance mask.
struct CsiSample {
  std::vector<std::complex<float>> csi;
  int links = 0;
  int antenna_pairs = 0;
  int subcarriers = 0;
  int time_len = 0;
  Activity activity = Activity::kWalk;
  int location = 1;  // 1-based
  std::vector<std::uint8_t> informative_mask;
  std::uint64_t seed = 0;

  dsp::CsiLinkView link_view(int link) const {
    const std::size_t block = static_cast<std::size_t>(antenna_pairs) *
                              subcarriers * time_len;
    return dsp::CsiLinkView{
        {csi.data() + static_cast<std::size_t>(link) * block, block},
        antenna_pairs,
        subcarriers,
        time_len};
  }
};

// Deterministic per-link relevance mask for a location: link xi is marked
// when link_human_gain / noise_floor >= relevance_threshold; when no link
// passes, the single highest-gain link is set (ties to the lowest index).
// Independent of the sample seed and of the activity dynamics.
std::vector<std::uint8_t> informative_links(const Environment& env, int location,
                                            const ActivityProfile& activity);

// Synthesize one sample. Identical (env, activity, location, seed)
// produce bit-identical tensors.
CsiSample generate_sample(const Environment& env, const ActivityProfile& activity,
                          int location, std::uint64_t seed);

}  // namespace linksense::sim
