// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "linksense/harness/gradcheck_cmd.hpp"
#include "linksense/harness/pipeline.hpp"

using namespace linksense;
using namespace linksense::harness;

namespace {

HarnessConfig small_config() {
  HarnessConfig cfg;
  cfg.env.sample_duration = 1.28;  // T=256, one window
  cfg.train_count = 40;
  cfg.test_count = 80;
  cfg.image_side = 16;
  cfg.threads = 2;
  return cfg;
}

// Synthetic features with given labels/locations; one window, one link,
// tiny images. Enough for supervised-case training and metric tests.
FeatureSet synthetic_features(int count, int side = 8, int links = 1) {
  FeatureSet fs;
  fs.num_links = links;
  fs.windows = 1;
  fs.window_len = 32;
  fs.image_side = side;
  Rng rng(99);
  for (int i = 0; i < count; ++i) {
    SampleFeatures sf;
    sf.activity = static_cast<std::uint8_t>(i % 5);
    sf.location = static_cast<std::uint8_t>(i % 16 + 1);
    sf.informative.assign(static_cast<std::size_t>(links), 1);
    nn::Tensor<float> obs({2 * links, fs.window_len});
    for (float& v : obs.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    sf.obs.push_back(std::move(obs));
    std::vector<nn::Tensor<float>> row;
    for (int l = 0; l < links; ++l) {
      nn::Tensor<float> img({2, side, side});
      for (float& v : img.data) v = static_cast<float>(rng.uniform(0.0, 1.0));
      row.push_back(std::move(img));
    }
    sf.images.push_back(std::move(row));
    fs.samples.push_back(std::move(sf));
  }
  return fs;
}

}  // namespace

TEST_CASE("config: parsing, comments, unknown keys, bad values") {
  const std::string text =
      "# benchmark setup\n"
      "noise_floor = 0.004\n"
      "window = 128\n"
      "dwt_levels = 5  # five levels\n"
      "batch_size = 32\n"
      "returns_mode = trailing\n";
  const HarnessConfig cfg = parse_config_text(text);
  CHECK(cfg.env.noise_floor == doctest::Approx(0.004));
  CHECK(cfg.window == 128);
  CHECK(cfg.batch_size == 32);

  CHECK_THROWS_AS(parse_config_text("nonsense_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("window = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("window 128\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("window = 100\n"), ConfigError);  // not 2^levels divisible
  CHECK_THROWS_AS(parse_config_text("returns_mode = sideways\n"), ConfigError);
}

TEST_CASE("config: per-case hyperparameter defaults and overrides") {
  HarnessConfig cfg;
  const auto joint = resolve_hyper(cfg, 1);
  CHECK(joint.lr == doctest::Approx(1e-4));
  CHECK(joint.batch_size == 128);
  const auto sup = resolve_hyper(cfg, 3);
  CHECK(sup.lr == doctest::Approx(1e-3));
  CHECK(sup.batch_size == 128);
  CHECK(sup.epochs == 200);
  const auto joint5 = resolve_hyper(cfg, 5);
  CHECK(joint5.lr == doctest::Approx(1e-4));

  cfg.learning_rate = 0.02;
  cfg.batch_size = 16;
  cfg.epochs = 3;
  const auto over = resolve_hyper(cfg, 2);
  CHECK(over.lr == doctest::Approx(0.02));
  CHECK(over.batch_size == 16);
  CHECK(over.epochs == 3);
  CHECK_THROWS_AS(resolve_hyper(cfg, 0), ConfigError);
  CHECK_THROWS_AS(resolve_hyper(cfg, 6), ConfigError);
}

TEST_CASE("features: window accounting and degenerate guard") {
  CHECK(windows_per_sample(800, 256, 128) == 5);
  CHECK(windows_per_sample(256, 256, 128) == 1);
  CHECK_THROWS_AS(windows_per_sample(200, 256, 128), DomainError);

  HarnessConfig cfg = small_config();
  sim::Environment env = sim::Environment::build(cfg.env);
  const auto sample = sim::generate_sample(
      env, sim::ActivityProfile::get(sim::Activity::kWalk), 3, 11);
  const SampleFeatures sf = build_sample_features(sample, cfg);
  CHECK(sf.obs.size() == 1);
  CHECK(sf.obs[0].shape == std::vector<int>{8, 256});
  CHECK(sf.images.size() == 1);
  CHECK(sf.images[0].size() == 4);
  CHECK(sf.images[0][0].shape == std::vector<int>{2, 16, 16});
  CHECK(sf.location == 3);
  CHECK(sf.informative == sample.informative_mask);
}

TEST_CASE("cases: orthogonal pair picks perpendicular links nearest the spot") {
  sim::Environment env = sim::Environment::build(sim::EnvironmentConfig{});
  // Square-edge links: 0 bottom, 1 left, 2 right, 3 top.
  CHECK(orthogonal_pair_mask(env, 1) == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK(orthogonal_pair_mask(env, 4) == std::vector<std::uint8_t>{1, 0, 1, 0});
  CHECK(orthogonal_pair_mask(env, 13) == std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(orthogonal_pair_mask(env, 16) == std::vector<std::uint8_t>{0, 0, 1, 1});
  // Deterministic.
  for (int loc = 1; loc <= 16; ++loc) {
    const auto m = orthogonal_pair_mask(env, loc);
    CHECK(m == orthogonal_pair_mask(env, loc));
    int count = 0;
    for (auto b : m) count += b;
    CHECK(count == 2);
  }
}

TEST_CASE("metrics: perfect outcomes give a diagonal confusion matrix") {
  FeatureSet fs = synthetic_features(800);
  std::vector<SampleOutcome> outcomes(fs.samples.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    outcomes[i].predicted = static_cast<int>(fs.samples[i].activity);
    outcomes[i].selected = 2;
    outcomes[i].jaccard = 1.0;
  }
  const Report r = aggregate_outcomes(outcomes, fs, 3, 1, 0);
  CHECK(r.accuracy == doctest::Approx(1.0));
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i != j) CHECK(r.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == 0);
    }
    CHECK(r.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] == 160);
  }
  for (int l = 0; l < 16; ++l) {
    CHECK(r.per_location_accuracy[static_cast<std::size_t>(l)] == doctest::Approx(1.0));
    CHECK(r.per_location_count[static_cast<std::size_t>(l)] == 50);
  }
  CHECK(r.total() == 800);
}

TEST_CASE("metrics: accuracy equals trace/total; random predictions near chance") {
  FeatureSet fs = synthetic_features(800);
  Rng rng(123);
  std::vector<SampleOutcome> outcomes(fs.samples.size());
  for (auto& o : outcomes) {
    o.predicted = static_cast<int>(rng.uniform_index(5));
    o.selected = 1;
  }
  const Report r = aggregate_outcomes(outcomes, fs, 4, 1, 0);
  int trace = 0;
  for (int i = 0; i < 5; ++i) trace += r.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  CHECK(std::abs(r.accuracy - static_cast<double>(trace) / r.total()) < 1e-12);
  CHECK(r.accuracy > 0.15);
  CHECK(r.accuracy < 0.25);
}

TEST_CASE("train: one supervised epoch takes ceil(N/batch) optimizer steps") {
  HarnessConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 128;
  cfg.image_side = 8;
  FeatureSet fs = synthetic_features(1949);
  sim::Environment env = sim::Environment::build(sim::EnvironmentConfig{});
  TrainOptions opt;
  opt.case_id = 3;
  opt.cnn_id = 1;
  opt.seed = 5;
  opt.threads = 2;
  const TrainResult r = train_case(cfg, env, fs, opt, nullptr);
  CHECK(r.optimizer_steps == 16);  // ceil(1949/128)
  CHECK(r.epochs_run == 1);
  CHECK(r.curve.size() == 1);
}

TEST_CASE("train: identical seeds give identical checkpoints, serial or parallel") {
  HarnessConfig cfg = small_config();
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-3;
  sim::Environment env = sim::Environment::build(cfg.env);
  sim::DatasetSpec spec;
  spec.train_count = 24;
  spec.test_count = 80;
  spec.seed = 9;
  const FeatureSet train = build_features_streamed(
      env, sim::train_assignments(env, spec), cfg, 2);

  auto run = [&](int threads, const char* dirname) {
    TrainOptions opt;
    opt.case_id = 1;
    opt.cnn_id = 1;
    opt.seed = 4;
    opt.threads = threads;
    opt.out_dir = std::filesystem::temp_directory_path() / dirname;
    std::filesystem::remove_all(opt.out_dir);
    const TrainResult r = train_case(cfg, env, train, opt, nullptr);
    return r.checkpoint_hash;
  };
  const auto h1 = run(1, "ls_det_a");
  const auto h2 = run(2, "ls_det_b");
  const auto h3 = run(2, "ls_det_c");
  CHECK(h1 == h2);
  CHECK(h2 == h3);
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "ls_det_a");
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "ls_det_b");
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "ls_det_c");
}

TEST_CASE("evaluate: case-4 reports are reproducible; report bytes stable") {
  HarnessConfig cfg = small_config();
  cfg.epochs = 1;
  cfg.batch_size = 16;
  sim::Environment env = sim::Environment::build(cfg.env);
  sim::DatasetSpec spec;
  spec.train_count = 20;
  spec.test_count = 80;
  spec.seed = 2;
  const FeatureSet train = build_features_streamed(
      env, sim::train_assignments(env, spec), cfg, 2);
  const FeatureSet test = build_features_streamed(
      env, sim::test_assignments(env, spec), cfg, 2);

  TrainOptions opt;
  opt.case_id = 4;
  opt.cnn_id = 1;
  opt.seed = 11;
  opt.threads = 2;
  TrainedModel model;
  (void)train_case(cfg, env, train, opt, &model);

  const Report r1 = evaluate_case(cfg, env, test, model, 4, 1, 11, 2);
  const Report r2 = evaluate_case(cfg, env, test, model, 4, 1, 11, 1);
  CHECK(r1.accuracy == r2.accuracy);
  CHECK(r1.confusion == r2.confusion);
  CHECK(r1.mean_selected_links == doctest::Approx(1.0));

  const auto p1 = std::filesystem::temp_directory_path() / "ls_rep1.json";
  const auto p2 = std::filesystem::temp_directory_path() / "ls_rep2.json";
  write_report_json(p1, r1, cfg);
  write_report_json(p2, r2, cfg);
  std::ifstream f1(p1), f2(p2);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  CHECK(!s1.empty());
  const Report back = report_from_json(p1);
  CHECK(back.accuracy == doctest::Approx(r1.accuracy));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("bench: decision time only for agent cases; workload ordering") {
  HarnessConfig cfg = small_config();
  cfg.epochs = 1;
  cfg.batch_size = 16;
  sim::Environment env = sim::Environment::build(cfg.env);
  sim::DatasetSpec spec;
  spec.train_count = 10;
  spec.test_count = 80;
  spec.seed = 6;
  const FeatureSet train = build_features_streamed(
      env, sim::train_assignments(env, spec), cfg, 2);
  const FeatureSet test = build_features_streamed(
      env, sim::test_assignments(env, spec), cfg, 2);

  TrainOptions opt;
  opt.threads = 2;
  opt.seed = 3;
  opt.cnn_id = 1;

  opt.case_id = 3;
  TrainedModel m3;
  (void)train_case(cfg, env, train, opt, &m3);
  const BenchReport b3 = bench_case(cfg, env, test, m3, 3, 1, 0, 60, 5);
  CHECK(b3.decision_ms < 0);  // not reported for fixed policies
  CHECK(b3.classification_ms > 0);

  opt.case_id = 4;
  TrainedModel m4;
  (void)train_case(cfg, env, train, opt, &m4);
  const BenchReport b4 = bench_case(cfg, env, test, m4, 4, 1, 0, 60, 5);
  CHECK(b4.decision_ms < 0);
  // Four links cost at least as much as one.
  CHECK(b3.classification_ms >= b4.classification_ms);

  opt.case_id = 1;
  TrainedModel m1;
  (void)train_case(cfg, env, train, opt, &m1);
  const BenchReport b1 = bench_case(cfg, env, test, m1, 1, 1, 0, 60, 5);
  CHECK(b1.decision_ms > 0);
  CHECK(b1.classification_ms > 0);

  // Timing stability is observed, not gated: shared machines jitter.
  const BenchReport b1b = bench_case(cfg, env, test, m1, 1, 1, 0, 60, 5);
  const double rel = std::abs(b1b.classification_ms - b1.classification_ms) /
                     std::max(b1.classification_ms, 1e-9);
  WARN_MESSAGE(rel < 0.2, "bench classification time varied by ",
               rel * 100.0, "% between runs");
}

TEST_CASE("gradcheck command: full sweep passes and is deterministic") {
  const auto s1 = run_grad_checks(42);
  CHECK(s1.all_pass);
  const auto s2 = run_grad_checks(42);
  REQUIRE(s1.entries.size() == s2.entries.size());
  for (std::size_t i = 0; i < s1.entries.size(); ++i) {
    CHECK(s1.entries[i].max_rel_error == s2.entries[i].max_rel_error);
  }
  const std::string text = format_grad_checks(s1);
  CHECK(text.find("arch/cnn4") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}
