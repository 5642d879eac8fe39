// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "linksense/harness/train.hpp"

namespace linksense::harness {

// Per-sample wall times, reported separately for the link-group decision
// (agent rollout) and the classification. The decision time applies only to
// the agent cases; it is negative otherwise. Absolute values are hardware
// dependent and never part of an acceptance threshold.
struct BenchReport {
  int case_id = 0;
  int cnn_id = 0;
  int samples = 0;
  double decision_ms = -1.0;
  double classification_ms = 0.0;
};

BenchReport bench_case(const HarnessConfig& config, const sim::Environment& env,
                       const FeatureSet& test_features, TrainedModel& model,
                       int case_id, int cnn_id, std::uint64_t seed,
                       int max_samples = 200, int warmup = 10);

}  // namespace linksense::harness
