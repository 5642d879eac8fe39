// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>

#include "linksense/harness/cases.hpp"
#include "linksense/harness/features.hpp"

namespace linksense::harness {

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;      // overall objective
  double loss_p = 0.0;    // classification term
  double loss_j = 0.0;    // REINFORCE term
  double loss_u = 0.0;    // action BCE term
  double train_accuracy = 0.0;
  double val_accuracy = -1.0;  // -1 when no validation split
};

struct TrainResult {
  int case_id = 0;
  int cnn_id = 0;
  std::uint64_t seed = 0;
  int optimizer_steps = 0;
  int epochs_run = 0;
  std::vector<EpochStats> curve;
  std::uint64_t checkpoint_hash = 0;  // 0 when no checkpoint was written
};

// Trained networks kept in memory for direct evaluation.
struct TrainedModel {
  bool has_agent = false;
  std::optional<agent::AgentNets<float>> agent;
  nn::Network<float> cnn;
};

struct TrainOptions {
  int case_id = 1;
  int cnn_id = 4;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;  // empty: keep the model in memory only
  int threads = 1;
};

// Supervised baselines (cases 2..4) classify the center analysis window.
int canonical_window(const FeatureSet& features);

// Trains one case. Cases 1 and 5 run the joint scheme (REINFORCE on the
// agent parameters, backprop on the classifier, one Adam step per batch);
// cases 2..4 train the classifier alone on the case's fixed link policy.
// Parallel episode execution accumulates gradients into fixed index chunks
// and reduces them in chunk order, so results are bit-identical for any
// thread count.
TrainResult train_case(const HarnessConfig& config, const sim::Environment& env,
                       const FeatureSet& train_features, const TrainOptions& options,
                       TrainedModel* model_out);

// Loads a checkpoint written by train_case into freshly built networks.
TrainedModel load_model(const std::filesystem::path& model_dir,
                        const HarnessConfig& config, const sim::Environment& env,
                        int case_id, int cnn_id, const FeatureSet& features);

}  // namespace linksense::harness
