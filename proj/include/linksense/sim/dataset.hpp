// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "linksense/sim/csi_generator.hpp"

namespace linksense::sim {

// Sample counts and the master seed for one generated dataset. Defaults
// follow the reference capture campaign: 1949 training samples and a test
// split balanced to 50 samples per location (10 per activity per location).
struct DatasetSpec {
  int train_count = 1949;
  int test_count = 800;
  std::uint64_t seed = 1;
};

struct SampleAssignment {
  Activity activity = Activity::kWalk;
  int location = 1;
  std::uint64_t seed = 0;
};

// Deterministic sample plans. Training walks the 16 locations repeatedly,
// switching activity after each pass; the test split is location-major and
// balanced per (location, activity) cell. Per-sample seeds of the two
// splits are disjoint by construction (opposite parity after the base mix).
std::vector<SampleAssignment> train_assignments(const Environment& env,
                                                const DatasetSpec& spec);
std::vector<SampleAssignment> test_assignments(const Environment& env,
                                               const DatasetSpec& spec);

struct Dataset {
  std::vector<CsiSample> train;
  std::vector<CsiSample> test;
};

// Materializes both splits in memory. Parallel generation is
// bit-identical to serial generation.
Dataset generate_dataset(const Environment& env, const DatasetSpec& spec,
                         int threads = 1);

}  // namespace linksense::sim
