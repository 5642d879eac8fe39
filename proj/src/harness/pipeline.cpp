// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "linksense/parallel.hpp"

namespace linksense::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

struct ModelInfo {
  int case_id = 0;
  int cnn_id = 0;
  int window = 256;
  int stride = 128;
  int dwt_levels = 5;
  int image_side = 32;
};

ModelInfo read_model_info(const std::filesystem::path& model_dir) {
  const auto path = model_dir / "train_summary.json";
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw FormatError("bad train summary: " + std::string(e.what()));
  }
  ModelInfo info;
  info.case_id = j.at("case");
  info.cnn_id = j.at("cnn");
  info.window = j.value("window", 256);
  info.stride = j.value("stride", 128);
  info.dwt_levels = j.value("dwt_levels", 5);
  info.image_side = j.value("image_side", 32);
  return info;
}

}  // namespace

void run_generate(const HarnessConfig& config, const std::filesystem::path& out_dir,
                  std::uint64_t seed, bool virtual_samples) {
  config.validate();
  const sim::Environment env = sim::Environment::build(config.env);
  sim::DatasetSpec spec;
  spec.train_count = config.train_count;
  spec.test_count = config.test_count;
  spec.seed = seed;
  sim::write_dataset_dir(out_dir, env, spec, virtual_samples,
                         resolve_threads(config));
}

sim::Environment env_from_dir(const std::filesystem::path& data_dir) {
  const sim::DatasetDirInfo info = sim::read_dataset_manifest(data_dir);
  return sim::Environment::build(info.env_config);
}

FeatureSet features_from_dir(const std::filesystem::path& data_dir,
                             const HarnessConfig& config, Split split,
                             int threads) {
  const sim::DatasetDirInfo info = sim::read_dataset_manifest(data_dir);
  const sim::Environment env = sim::Environment::build(info.env_config);

  if (info.virtual_samples) {
    const auto plan = split == Split::kTrain
                          ? sim::train_assignments(env, info.spec)
                          : sim::test_assignments(env, info.spec);
    return build_features_streamed(env, plan, config, threads);
  }

  const char* file = split == Split::kTrain ? "train.csd" : "test.csd";
  const std::filesystem::path path = data_dir / file;
  std::uint32_t count;
  {
    sim::CsdReader probe(path);
    count = probe.sample_count();
  }
  FeatureSet fs;
  fs.num_links = 0;
  fs.samples.resize(count);
  // One reader per chunk: CsdReader seeks are not shareable across threads.
  parallel_chunks(count, static_cast<std::size_t>(threads) * 2,
                  static_cast<std::size_t>(threads),
                  [&](std::size_t, std::size_t lo, std::size_t hi) {
    sim::CsdReader reader(path);
    for (std::size_t i = lo; i < hi; ++i) {
      const sim::CsiSample sample = reader.read(static_cast<std::uint32_t>(i));
      fs.samples[i] = build_sample_features(sample, config);
    }
  });
  if (count > 0) {
    sim::CsdReader probe(path);
    fs.num_links = probe.links();
    fs.window_len = config.window;
    fs.image_side = config.image_side;
    fs.windows = windows_per_sample(probe.time_len(), config.window, config.stride);
  }
  return fs;
}

TrainResult run_train(const HarnessConfig& config,
                      const std::filesystem::path& data_dir, int case_id,
                      int cnn_id, const std::filesystem::path& out_dir,
                      int epochs_override, std::uint64_t seed) {
  HarnessConfig cfg = config;
  if (epochs_override > 0) cfg.epochs = epochs_override;
  cfg.validate();
  const int threads = resolve_threads(cfg);
  const sim::Environment env = env_from_dir(data_dir);
  const FeatureSet train = features_from_dir(data_dir, cfg, Split::kTrain, threads);

  TrainOptions options;
  options.case_id = case_id;
  options.cnn_id = cnn_id;
  options.seed = seed;
  options.out_dir = out_dir;
  options.threads = threads;
  TrainResult result = train_case(cfg, env, train, options, nullptr);

  // Record the preprocessing geometry next to the checkpoint so evaluation
  // rebuilds matching networks.
  const auto summary_path = out_dir / "train_summary.json";
  std::ifstream in(summary_path);
  ordered_json j;
  in >> j;
  in.close();
  j["window"] = cfg.window;
  j["stride"] = cfg.stride;
  j["dwt_levels"] = cfg.dwt_levels;
  j["image_side"] = cfg.image_side;
  std::ofstream out(summary_path);
  out << j.dump(2) << "\n";
  return result;
}

namespace {

// Debug dump: spectrum images of the first few test samples as binary
// PGMs, one file per channel.
void dump_spectrum_images(const std::filesystem::path& dir,
                          const FeatureSet& features, int window) {
  std::filesystem::create_directories(dir);
  const int n = std::min<int>(3, static_cast<int>(features.samples.size()));
  for (int s = 0; s < n; ++s) {
    const SampleFeatures& sf = features.samples[static_cast<std::size_t>(s)];
    const auto& row = sf.images[static_cast<std::size_t>(window)];
    for (std::size_t l = 0; l < row.size(); ++l) {
      for (int ch = 0; ch < 2; ++ch) {
        const int side = row[l].shape[1];
        std::ofstream out(dir / ("dwt_s" + std::to_string(s) + "_l" +
                                 std::to_string(l) + "_c" + std::to_string(ch) +
                                 ".pgm"),
                          std::ios::binary);
        out << "P5\n" << side << " " << side << "\n255\n";
        const float* plane = row[l].ptr() + static_cast<std::size_t>(ch) * side * side;
        for (int i = 0; i < side * side; ++i) {
          const float v = std::clamp(plane[i], 0.0f, 1.0f);
          out.put(static_cast<char>(static_cast<int>(v * 255.0f)));
        }
      }
    }
  }
}

}  // namespace

Report run_eval(const HarnessConfig& config, const std::filesystem::path& model_dir,
                const std::filesystem::path& data_dir, int case_id,
                const std::filesystem::path& report_path) {
  const ModelInfo info = read_model_info(model_dir);
  if (info.case_id != case_id) {
    throw ConfigError("model was trained for case " + std::to_string(info.case_id) +
                      ", not case " + std::to_string(case_id));
  }
  HarnessConfig cfg = config;
  cfg.window = info.window;
  cfg.stride = info.stride;
  cfg.dwt_levels = info.dwt_levels;
  cfg.image_side = info.image_side;
  const int threads = resolve_threads(cfg);
  const sim::Environment env = env_from_dir(data_dir);
  const FeatureSet test = features_from_dir(data_dir, cfg, Split::kTest, threads);
  TrainedModel model =
      load_model(model_dir, cfg, env, info.case_id, info.cnn_id, test);
  const std::uint64_t seed = [&] {
    std::ifstream in(model_dir / "train_summary.json");
    ordered_json j;
    in >> j;
    return j.value("seed", std::uint64_t{0});
  }();
  Report report = evaluate_case(cfg, env, test, model, info.case_id, info.cnn_id,
                                seed, threads);
  if (!report_path.empty()) write_report_json(report_path, report, cfg);
  if (cfg.dump_images && !report_path.empty()) {
    dump_spectrum_images(report_path.parent_path() / "dwt_images", test,
                         canonical_window(test));
  }
  return report;
}

BenchReport run_bench(const HarnessConfig& config,
                      const std::filesystem::path& model_dir,
                      const std::filesystem::path& data_dir, int case_id,
                      const std::filesystem::path& report_path) {
  const ModelInfo info = read_model_info(model_dir);
  if (info.case_id != case_id) {
    throw ConfigError("model was trained for case " + std::to_string(info.case_id) +
                      ", not case " + std::to_string(case_id));
  }
  HarnessConfig cfg = config;
  cfg.window = info.window;
  cfg.stride = info.stride;
  cfg.dwt_levels = info.dwt_levels;
  cfg.image_side = info.image_side;
  const int threads = resolve_threads(cfg);
  const sim::Environment env = env_from_dir(data_dir);
  const FeatureSet test = features_from_dir(data_dir, cfg, Split::kTest, threads);
  TrainedModel model =
      load_model(model_dir, cfg, env, info.case_id, info.cnn_id, test);
  BenchReport report = bench_case(cfg, env, test, model, info.case_id,
                                  info.cnn_id, 0);
  if (!report_path.empty()) {
    ordered_json j;
    j["case"] = report.case_id;
    j["cnn"] = report.cnn_id;
    j["samples"] = report.samples;
    if (report.decision_ms >= 0) j["decision_ms"] = report.decision_ms;
    j["classification_ms"] = report.classification_ms;
    std::ofstream out(report_path);
    out << j.dump(2) << "\n";
  }
  return report;
}

}  // namespace linksense::harness
