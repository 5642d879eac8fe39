// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/bench.hpp"

#include <chrono>

#include "linksense/classifier/classifier.hpp"

namespace linksense::harness {

namespace {

constexpr std::uint64_t kCase4EvalTag = 0xca5e4e7aULL;  // matches evaluate_case

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

BenchReport bench_case(const HarnessConfig& config, const sim::Environment& env,
                       const FeatureSet& test_features, TrainedModel& model,
                       int case_id, int cnn_id, std::uint64_t seed,
                       int max_samples, int warmup) {
  (void)config;
  BenchReport report;
  report.case_id = case_id;
  report.cnn_id = cnn_id;

  const int wc = canonical_window(test_features);
  const int available = static_cast<int>(test_features.samples.size());
  const int n = std::min(available, warmup + max_samples);
  const bool uses_agent = case_uses_agent(case_id);

  double decision_total = 0.0;
  double classify_total = 0.0;
  int measured = 0;

  for (int i = 0; i < n; ++i) {
    const SampleFeatures& sf = test_features.samples[static_cast<std::size_t>(i)];
    const bool warm = i < warmup;
    std::vector<std::uint8_t> mask;

    if (uses_agent) {
      const agent::EpisodeInput input = sf.episode_input();
      const auto t0 = std::chrono::steady_clock::now();
      agent::Trajectory traj = agent::run_policy_rollout(
          *model.agent, input, agent::SelectMode::kGreedy, nullptr, nullptr);
      const double decision = ms_since(t0);
      mask = traj.final_mask();
      if (!warm) decision_total += decision;
    } else {
      switch (case_policy(case_id)) {
        case LinkPolicy::kOrthogonalPair:
          mask = orthogonal_pair_mask(env, sf.location);
          break;
        case LinkPolicy::kAllLinks:
          mask = all_links_mask(test_features.num_links);
          break;
        case LinkPolicy::kRandomSingle: {
          Rng rng(mix_seed(seed, kCase4EvalTag, static_cast<std::size_t>(i)));
          mask = random_single_mask(test_features.num_links, rng);
          break;
        }
        default:
          throw ConfigError("unexpected policy in bench_case");
      }
    }

    std::vector<const nn::Tensor<float>*> imgs;
    for (std::size_t l = 0; l < mask.size(); ++l) {
      if (mask[l]) imgs.push_back(&sf.images[static_cast<std::size_t>(wc)][l]);
    }
    const auto t1 = std::chrono::steady_clock::now();
    (void)classifier::predict_group<float>(model.cnn, imgs, nn::Mode::kEval,
                                           nullptr, nullptr);
    const double classify = ms_since(t1);
    if (!warm) {
      classify_total += classify;
      ++measured;
    }
  }

  report.samples = measured;
  if (measured > 0) {
    report.classification_ms = classify_total / measured;
    if (uses_agent) report.decision_ms = decision_total / measured;
  }
  return report;
}

}  // namespace linksense::harness
