// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>

#include "linksense/harness/train.hpp"

namespace linksense::harness {

// Deterministic greedy evaluation over a test split.
struct Report {
  int case_id = 0;
  int cnn_id = 0;
  std::uint64_t seed = 0;

  double accuracy = 0.0;
  // confusion[true][predicted], raw counts.
  std::array<std::array<int, 5>, 5> confusion{};
  std::array<double, 16> per_location_accuracy{};
  std::array<int, 16> per_location_count{};
  // Mean selected links per (location, activity).
  std::array<std::array<double, 5>, 16> link_counts{};
  std::array<std::array<int, 5>, 16> cell_counts{};
  double mean_selected_links = 0.0;
  // Jaccard overlap between the final link group and the planted mask
  // (meaningful for the agent cases).
  double mean_jaccard = 0.0;
  // Mean selected-link count per activity, over all locations.
  std::array<double, 5> per_activity_links{};

  int total() const;
};

// Per-sample evaluation outcome, aggregated into a Report.
struct SampleOutcome {
  int predicted = 0;
  int selected = 0;      // link-group size
  double jaccard = 0.0;  // overlap with the planted mask
};

// Pure aggregation of outcomes against the split's labels; accuracy equals
// trace(confusion)/total by construction.
Report aggregate_outcomes(const std::vector<SampleOutcome>& outcomes,
                          const FeatureSet& features, int case_id, int cnn_id,
                          std::uint64_t seed);

Report evaluate_case(const HarnessConfig& config, const sim::Environment& env,
                     const FeatureSet& test_features, TrainedModel& model,
                     int case_id, int cnn_id, std::uint64_t seed, int threads);

// Report JSON; field order and float formatting are fixed so identical
// inputs produce identical bytes.
void write_report_json(const std::filesystem::path& path, const Report& report,
                       const HarnessConfig& config);

Report report_from_json(const std::filesystem::path& path);

}  // namespace linksense::harness
