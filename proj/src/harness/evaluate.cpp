// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/evaluate.hpp"

#include <fstream>

#include <json.hpp>

#include "linksense/classifier/classifier.hpp"
#include "linksense/parallel.hpp"

namespace linksense::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kCase4EvalTag = 0xca5e4e7aULL;

int argmax(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

double jaccard(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

int Report::total() const {
  int n = 0;
  for (const auto& row : confusion) {
    for (int v : row) n += v;
  }
  return n;
}

Report aggregate_outcomes(const std::vector<SampleOutcome>& outcomes,
                          const FeatureSet& features, int case_id, int cnn_id,
                          std::uint64_t seed) {
  const std::size_t n = outcomes.size();
  if (n == 0 || n != features.samples.size()) {
    throw DomainError("aggregate_outcomes: outcome/label length mismatch");
  }
  Report report;
  report.case_id = case_id;
  report.cnn_id = cnn_id;
  report.seed = seed;

  std::array<std::array<double, 5>, 16> link_sums{};
  double selected_sum = 0.0, jaccard_sum = 0.0;
  int correct = 0;
  std::array<int, 16> loc_correct{};
  for (std::size_t i = 0; i < n; ++i) {
    const SampleFeatures& sf = features.samples[i];
    const SampleOutcome& out = outcomes[i];
    const int gt = static_cast<int>(sf.activity);
    const int loc = sf.location - 1;
    report.confusion[static_cast<std::size_t>(gt)]
                    [static_cast<std::size_t>(out.predicted)] += 1;
    report.per_location_count[static_cast<std::size_t>(loc)] += 1;
    if (out.predicted == gt) {
      ++correct;
      loc_correct[static_cast<std::size_t>(loc)] += 1;
    }
    report.cell_counts[static_cast<std::size_t>(loc)][static_cast<std::size_t>(gt)] += 1;
    link_sums[static_cast<std::size_t>(loc)][static_cast<std::size_t>(gt)] +=
        out.selected;
    selected_sum += out.selected;
    jaccard_sum += out.jaccard;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  for (int l = 0; l < 16; ++l) {
    const int c = report.per_location_count[static_cast<std::size_t>(l)];
    report.per_location_accuracy[static_cast<std::size_t>(l)] =
        c > 0 ? static_cast<double>(loc_correct[static_cast<std::size_t>(l)]) / c
              : 0.0;
    for (int a = 0; a < 5; ++a) {
      const int cc = report.cell_counts[static_cast<std::size_t>(l)]
                                       [static_cast<std::size_t>(a)];
      report.link_counts[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)] =
          cc > 0 ? link_sums[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)] / cc
                 : 0.0;
    }
  }
  for (int a = 0; a < 5; ++a) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<int>(features.samples[i].activity) == a) {
        sum += outcomes[i].selected;
        ++count;
      }
    }
    report.per_activity_links[static_cast<std::size_t>(a)] =
        count > 0 ? sum / count : 0.0;
  }
  report.mean_selected_links = selected_sum / static_cast<double>(n);
  report.mean_jaccard = jaccard_sum / static_cast<double>(n);
  return report;
}

Report evaluate_case(const HarnessConfig& config, const sim::Environment& env,
                     const FeatureSet& test_features, TrainedModel& model,
                     int case_id, int cnn_id, std::uint64_t seed, int threads) {
  const auto n = test_features.samples.size();
  if (n == 0) throw DomainError("evaluate: empty test split");
  const int wc = canonical_window(test_features);
  std::vector<SampleOutcome> outcomes(n);

  parallel_for(n, static_cast<std::size_t>(threads), [&](std::size_t i) {
    const SampleFeatures& sf = test_features.samples[i];
    std::vector<double> p;
    std::vector<std::uint8_t> mask;
    if (case_uses_agent(case_id)) {
      const agent::EpisodeInput input = sf.episode_input();
      agent::EpisodeResult ep =
          agent::run_episode(*model.agent, model.cnn, input, nn::Mode::kEval,
                             nullptr, config.discount, nullptr, nullptr);
      p = std::move(ep.final_p);
      mask = ep.traj.final_mask();
    } else {
      switch (case_policy(case_id)) {
        case LinkPolicy::kOrthogonalPair:
          mask = orthogonal_pair_mask(env, sf.location);
          break;
        case LinkPolicy::kAllLinks:
          mask = all_links_mask(test_features.num_links);
          break;
        case LinkPolicy::kRandomSingle: {
          Rng rng(mix_seed(seed, kCase4EvalTag, i));
          mask = random_single_mask(test_features.num_links, rng);
          break;
        }
        default:
          throw ConfigError("unexpected policy in evaluate_case");
      }
      std::vector<const nn::Tensor<float>*> imgs;
      for (std::size_t l = 0; l < mask.size(); ++l) {
        if (mask[l]) imgs.push_back(&sf.images[static_cast<std::size_t>(wc)][l]);
      }
      p = classifier::predict_group<float>(model.cnn, imgs, nn::Mode::kEval,
                                           nullptr, nullptr);
    }
    SampleOutcome& out = outcomes[i];
    out.predicted = argmax(p);
    for (auto b : mask) out.selected += b ? 1 : 0;
    out.jaccard = jaccard(mask, sf.informative);
  });

  return aggregate_outcomes(outcomes, test_features, case_id, cnn_id, seed);
}

void write_report_json(const std::filesystem::path& path, const Report& report,
                       const HarnessConfig& config) {
  ordered_json j;
  j["case"] = report.case_id;
  j["cnn"] = report.cnn_id;
  j["seed"] = report.seed;
  j["accuracy"] = report.accuracy;
  j["confusion"] = report.confusion;
  j["per_location_accuracy"] = report.per_location_accuracy;
  j["per_location_count"] = report.per_location_count;
  j["link_counts"] = report.link_counts;
  j["per_activity_links"] = report.per_activity_links;
  j["mean_selected_links"] = report.mean_selected_links;
  j["mean_jaccard"] = report.mean_jaccard;
  j["config"] = {
      {"noise_floor", config.env.noise_floor},
      {"relevance_threshold", config.env.relevance_threshold},
      {"window", config.window},
      {"stride", config.stride},
      {"image_side", config.image_side},
      {"lambda1", config.lambda1},
      {"lambda2", config.lambda2},
      {"discount", config.discount},
  };
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write report " + path.string());
  out << j.dump(2) << "\n";
}

Report report_from_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open report " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw FormatError("bad report JSON: " + std::string(e.what()));
  }
  Report r;
  r.case_id = j.at("case");
  r.cnn_id = j.at("cnn");
  r.seed = j.at("seed");
  r.accuracy = j.at("accuracy");
  r.confusion = j.at("confusion");
  r.per_location_accuracy = j.at("per_location_accuracy");
  r.per_location_count = j.at("per_location_count");
  r.link_counts = j.at("link_counts");
  r.per_activity_links = j.at("per_activity_links");
  r.mean_selected_links = j.at("mean_selected_links");
  r.mean_jaccard = j.at("mean_jaccard");
  return r;
}

}  // namespace linksense::harness
