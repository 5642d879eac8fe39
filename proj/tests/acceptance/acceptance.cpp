// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Each criterion prints one PASS/FAIL line with the
// measured value; the process exits nonzero if any criterion fails.
//
// Groups (selected with --group):
//   math         closed-form oracles for the loss/transform algebra
//   gradients    finite-difference validation of all backward passes
//   bandit       REINFORCE convergence on a two-link bandit
//   determinism  byte-identical datasets, checkpoints and reports
//   benchmark    the full training study on the default synthetic dataset
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "linksense/classifier/classifier.hpp"
#include "linksense/dsp/dwt.hpp"
#include "linksense/dsp/pca.hpp"
#include "linksense/dsp/preprocess.hpp"
#include "linksense/harness/gradcheck_cmd.hpp"
#include "linksense/harness/pipeline.hpp"
#include "linksense/hash.hpp"
#include "linksense/nn/adam.hpp"

using namespace linksense;

namespace {

struct Checker {
  bool all_pass = true;
  int count = 0;

  void check(bool ok, const std::string& name, const std::string& detail) {
    ++count;
    std::printf("%s  %s  (%s)\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && ok;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

// ---------------------------------------------------------------------------

void group_math(Checker& c) {
  // Normalization: zero mean, unit variance, idempotence.
  {
    Rng rng(101);
    std::vector<double> x(500);
    for (double& v : x) v = rng.uniform(-4.0, 4.0) + 2.0;
    const auto o = dsp::zero_mean_normalize(x);
    double mean = 0.0;
    for (double v : o) mean += v;
    mean /= static_cast<double>(o.size());
    double var = 0.0;
    for (double v : o) var += (v - mean) * (v - mean);
    var /= static_cast<double>(o.size());
    const auto oo = dsp::zero_mean_normalize(o);
    double drift = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) drift = std::max(drift, std::abs(oo[i] - o[i]));
    const bool ok = std::abs(mean) < 1e-9 && std::abs(std::sqrt(var) - 1.0) < 1e-9 &&
                    drift < 1e-9;
    c.check(ok, "math/normalization",
            fmt("|mean|=%.2e |std-1|=%.2e idempotence=%.2e", std::abs(mean),
                std::abs(std::sqrt(var) - 1.0), drift));
  }

  // Returns vs O(T^2) brute force.
  {
    Rng rng(102);
    double worst = 0.0;
    for (int len : {1, 2, 5, 9, 40}) {
      std::vector<double> r(static_cast<std::size_t>(len));
      for (double& v : r) v = rng.uniform(-1.0, 1.0);
      const double psi = 0.9;
      const auto g = agent::discounted_returns(r, psi);
      for (int t = 0; t < len; ++t) {
        double acc = 0.0;
        for (int k = 0; k <= t; ++k) {
          acc += std::pow(psi, k) * r[static_cast<std::size_t>(t - k)];
        }
        worst = std::max(worst, std::abs(g[static_cast<std::size_t>(t)] - acc));
      }
    }
    c.check(worst < 1e-12, "math/returns-brute-force", fmt("max_abs_err=%.2e", worst));
  }

  // Action BCE and classification loss vs independent re-summation.
  {
    Rng rng(103);
    double worst_u = 0.0, worst_p = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int links = 4, steps = 3;
      std::vector<agent::StepAction> acts(static_cast<std::size_t>(steps));
      std::vector<std::uint8_t> truth(static_cast<std::size_t>(links));
      for (auto& b : truth) b = rng.bernoulli(0.5) ? 1 : 0;
      double oracle = 0.0;
      for (auto& s : acts) {
        for (int i = 0; i < links; ++i) {
          const double u = rng.uniform(0.02, 0.98);
          s.probs.push_back(u);
          oracle += truth[static_cast<std::size_t>(i)] ? std::log(u) : std::log(1.0 - u);
        }
        s.mask = truth;
      }
      oracle = -oracle / links;
      worst_u = std::max(worst_u, std::abs(agent::action_bce_loss(acts, truth) - oracle));

      std::vector<double> p(5), soft(5);
      double norm = 0.0;
      for (double& v : p) {
        v = rng.uniform(0.01, 1.0);
        norm += v;
      }
      for (double& v : p) v /= norm;
      for (double& v : soft) v = rng.uniform(0.0, 1.0);
      double oracle_p = 0.0;
      for (int i = 0; i < 5; ++i) {
        oracle_p -= soft[static_cast<std::size_t>(i)] *
                    std::log(std::clamp(p[static_cast<std::size_t>(i)], 1e-7, 1.0 - 1e-7));
      }
      oracle_p /= 5.0;
      worst_p = std::max(worst_p,
                         std::abs(classifier::classification_loss(p, soft) - oracle_p));
    }
    c.check(worst_u < 1e-12, "math/action-bce-resummation", fmt("max_abs_err=%.2e", worst_u));
    c.check(worst_p < 1e-12, "math/classification-resummation",
            fmt("max_abs_err=%.2e", worst_p));
  }

  // PCA component decorrelation and eigenvalue order.
  {
    Rng rng(104);
    double worst_rho = 0.0;
    bool ordered = true;
    for (int trial = 0; trial < 10; ++trial) {
      const int dims = 12, len = 300;
      std::vector<double> s1(static_cast<std::size_t>(len)), s2(static_cast<std::size_t>(len));
      for (int t = 0; t < len; ++t) {
        s1[static_cast<std::size_t>(t)] = 2.0 * std::sin(0.13 * t + trial);
        s2[static_cast<std::size_t>(t)] = rng.uniform(-1.0, 1.0);
      }
      std::vector<double> data(static_cast<std::size_t>(dims) * len);
      for (int i = 0; i < dims; ++i) {
        const double w1 = rng.uniform(-1.0, 1.0), w2 = rng.uniform(-1.0, 1.0);
        for (int t = 0; t < len; ++t) {
          data[static_cast<std::size_t>(i) * len + t] =
              w1 * s1[static_cast<std::size_t>(t)] + 0.4 * w2 * s2[static_cast<std::size_t>(t)] +
              0.02 * rng.gaussian();
        }
      }
      const auto r = dsp::pca_components(data, dims, len, 2);
      for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) {
        ordered = ordered && r.eigenvalues[i] <= r.eigenvalues[i - 1] + 1e-12;
      }
      double dot = 0.0, n1 = 0.0, n2 = 0.0;
      for (int t = 0; t < len; ++t) {
        dot += r.scores[0][static_cast<std::size_t>(t)] * r.scores[1][static_cast<std::size_t>(t)];
        n1 += r.scores[0][static_cast<std::size_t>(t)] * r.scores[0][static_cast<std::size_t>(t)];
        n2 += r.scores[1][static_cast<std::size_t>(t)] * r.scores[1][static_cast<std::size_t>(t)];
      }
      worst_rho = std::max(worst_rho, std::abs(dot / std::sqrt(n1 * n2)));
    }
    c.check(worst_rho < 1e-8 && ordered, "math/pca-orthogonality",
            fmt("max|rho|=%.2e ordered=%d", worst_rho, ordered ? 1 : 0));
  }

  // DWT round trip and energy preservation.
  {
    Rng rng(105);
    double worst_rt = 0.0, worst_energy = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> x(256);
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      const auto dec = dsp::dwt_decompose(x, 5);
      double ex = 0.0, ec = 0.0;
      for (double v : x) ex += v * v;
      for (double v : dec.approx) ec += v * v;
      for (const auto& d : dec.details) {
        for (double v : d) ec += v * v;
      }
      worst_energy = std::max(worst_energy, std::abs(ec - ex) / ex);
      const auto back = dsp::dwt_reconstruct(dec);
      for (std::size_t i = 0; i < x.size(); ++i) {
        worst_rt = std::max(worst_rt, std::abs(back[i] - x[i]));
      }
    }
    c.check(worst_rt < 1e-8, "math/dwt-roundtrip", fmt("max_abs_err=%.2e", worst_rt));
    c.check(worst_energy < 1e-8, "math/dwt-energy", fmt("max_rel_err=%.2e", worst_energy));
  }
}

// ---------------------------------------------------------------------------

void group_gradients(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto summary = harness::run_grad_checks(42);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& e : summary.entries) {
    c.check(e.pass, "gradients/" + e.target,
            fmt("max_rel_error=%.3e", e.max_rel_error));
  }
  c.check(elapsed < 300.0, "gradients/runtime", fmt("%.1f s (budget 300)", elapsed));
}

// ---------------------------------------------------------------------------

void group_bandit(Checker& c) {
  // Two-link, one-step bandit: including link 0 pays +1, link 1 pays -1.
  int successes = 0;
  std::vector<std::string> details;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    nn::Param<double> logits("bandit.z", {2});
    Rng rng(seed);
    nn::HyperParams hp;
    hp.lr = 0.05;
    int steps = 0;
    for (int iter = 0; iter < 500; ++iter) {
      const double u0 = 1.0 / (1.0 + std::exp(-logits.value.data[0]));
      const double u1 = 1.0 / (1.0 + std::exp(-logits.value.data[1]));
      agent::StepAction s;
      s.probs = {u0, u1};
      s.mask = {rng.bernoulli(u0) ? std::uint8_t{1} : std::uint8_t{0},
                rng.bernoulli(u1) ? std::uint8_t{1} : std::uint8_t{0}};
      if (!s.mask[0] && !s.mask[1]) s.mask[u0 >= u1 ? 0 : 1] = 1;
      const double g = (s.mask[0] ? 1.0 : 0.0) - (s.mask[1] ? 1.0 : 0.0);
      const auto du = agent::reinforce_loss_grad_step(s, g, 1, false);
      for (int i = 0; i < 2; ++i) {
        logits.grad.data[static_cast<std::size_t>(i)] +=
            du[static_cast<std::size_t>(i)] * s.probs[static_cast<std::size_t>(i)] *
            (1.0 - s.probs[static_cast<std::size_t>(i)]);
      }
      std::vector<nn::Param<double>*> params = {&logits};
      nn::adam_step(params, steps, hp);
    }
    const double p0 = 1.0 / (1.0 + std::exp(-logits.value.data[0]));
    const double p1 = 1.0 / (1.0 + std::exp(-logits.value.data[1]));
    if (p0 > 0.9 && p1 < 0.1) ++successes;
    details.push_back(fmt("seed%llu p0=%.3f p1=%.3f",
                          static_cast<unsigned long long>(seed), p0, p1));
  }
  std::string all;
  for (const auto& d : details) all += d + " ";
  c.check(successes >= 4, "bandit/convergence",
          fmt("%d/5 seeds converged; %s", successes, all.c_str()));
}

// ---------------------------------------------------------------------------

void group_determinism(Checker& c) {
  namespace fs = std::filesystem;
  harness::HarnessConfig cfg;
  cfg.env.sample_duration = 1.28;
  cfg.train_count = 24;
  cfg.test_count = 80;
  cfg.image_side = 16;
  cfg.batch_size = 8;
  cfg.epochs = 2;
  cfg.learning_rate = 1e-3;

  const sim::Environment env = sim::Environment::build(cfg.env);
  sim::DatasetSpec spec;
  spec.train_count = cfg.train_count;
  spec.test_count = cfg.test_count;
  spec.seed = 17;

  auto file_hash = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    Fnv1a64 h;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
      h.update(buf, static_cast<std::size_t>(in.gcount()));
      if (!in) break;
    }
    return h.digest();
  };

  // Dataset bytes: rerun and serial-vs-parallel.
  {
    const auto d1 = fs::temp_directory_path() / "ls_acc_data1";
    const auto d2 = fs::temp_directory_path() / "ls_acc_data2";
    fs::remove_all(d1);
    fs::remove_all(d2);
    sim::write_dataset_dir(d1, env, spec, false, 1);
    sim::write_dataset_dir(d2, env, spec, false, 2);
    const bool ok = file_hash(d1 / "train.csd") == file_hash(d2 / "train.csd") &&
                    file_hash(d1 / "test.csd") == file_hash(d2 / "test.csd");
    c.check(ok, "determinism/dataset-bytes",
            fmt("train=%016llx", static_cast<unsigned long long>(file_hash(d1 / "train.csd"))));
    fs::remove_all(d1);
    fs::remove_all(d2);
  }

  // Checkpoint hash and report bytes across thread counts and reruns.
  {
    const harness::FeatureSet train = harness::build_features_streamed(
        env, sim::train_assignments(env, spec), cfg, 2);
    const harness::FeatureSet test = harness::build_features_streamed(
        env, sim::test_assignments(env, spec), cfg, 2);

    auto run = [&](int threads, const char* name, std::string* report_bytes) {
      harness::TrainOptions opt;
      opt.case_id = 1;
      opt.cnn_id = 1;
      opt.seed = 4;
      opt.threads = threads;
      opt.out_dir = fs::temp_directory_path() / name;
      fs::remove_all(opt.out_dir);
      harness::TrainedModel model;
      const harness::TrainResult r = harness::train_case(cfg, env, train, opt, &model);
      const harness::Report rep =
          harness::evaluate_case(cfg, env, test, model, 1, 1, 4, threads);
      const auto rp = opt.out_dir / "report.json";
      harness::write_report_json(rp, rep, cfg);
      std::ifstream in(rp);
      report_bytes->assign((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
      return r.checkpoint_hash;
    };
    std::string rep1, rep2, rep3;
    const auto h1 = run(1, "ls_acc_run1", &rep1);
    const auto h2 = run(2, "ls_acc_run2", &rep2);
    const auto h3 = run(2, "ls_acc_run3", &rep3);
    c.check(h1 == h2 && h2 == h3, "determinism/checkpoint-hash",
            fmt("serial=%016llx parallel=%016llx rerun=%016llx",
                static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2),
                static_cast<unsigned long long>(h3)));
    c.check(!rep1.empty() && rep1 == rep2 && rep2 == rep3,
            "determinism/report-bytes", fmt("%zu bytes", rep1.size()));
    for (const char* name : {"ls_acc_run1", "ls_acc_run2", "ls_acc_run3"}) {
      fs::remove_all(fs::temp_directory_path() / name);
    }
  }
}

// ---------------------------------------------------------------------------

#ifndef LINKSENSE_BENCHMARK_CONFIG
#define LINKSENSE_BENCHMARK_CONFIG "configs/benchmark.cfg"
#endif

void group_benchmark(Checker& c, const std::string& config_path) {
  namespace fs = std::filesystem;
  harness::HarnessConfig cfg = harness::load_config_file(config_path);
  const int threads = harness::resolve_threads(cfg);

  const sim::Environment env = sim::Environment::build(cfg.env);
  sim::DatasetSpec spec;
  spec.train_count = cfg.train_count;
  spec.test_count = cfg.test_count;
  spec.seed = 1;

  std::printf("benchmark: building features for %d train / %d test samples\n",
              spec.train_count, spec.test_count);
  std::fflush(stdout);
  const auto tf0 = std::chrono::steady_clock::now();
  const harness::FeatureSet train = harness::build_features_streamed(
      env, sim::train_assignments(env, spec), cfg, threads);
  const harness::FeatureSet test = harness::build_features_streamed(
      env, sim::test_assignments(env, spec), cfg, threads);
  std::printf("benchmark: features ready in %.0f s\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - tf0)
                  .count());
  std::fflush(stdout);

  const int cnn_id = 4;
  const std::uint64_t seeds[3] = {1, 2, 3};
  // reports[case][seed]
  std::vector<std::vector<harness::Report>> reports(5);
  for (int case_id : {1, 2, 3, 4}) {
    for (const std::uint64_t seed : seeds) {
      harness::TrainOptions opt;
      opt.case_id = case_id;
      opt.cnn_id = cnn_id;
      opt.seed = seed;
      opt.threads = threads;
      const auto t0 = std::chrono::steady_clock::now();
      harness::TrainedModel model;
      const harness::TrainResult r = harness::train_case(cfg, env, train, opt, &model);
      const harness::Report rep =
          harness::evaluate_case(cfg, env, test, model, case_id, cnn_id, seed, threads);
      std::printf(
          "benchmark: case %d seed %llu: acc=%.4f jaccard=%.3f selected=%.2f "
          "(%d epochs, %.0f s)\n",
          case_id, static_cast<unsigned long long>(seed), rep.accuracy,
          rep.mean_jaccard, rep.mean_selected_links, r.epochs_run,
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count());
      std::fflush(stdout);
      reports[static_cast<std::size_t>(case_id)].push_back(rep);
    }
  }

  auto acc_median = [&](int case_id) {
    const auto& rs = reports[static_cast<std::size_t>(case_id)];
    return median3(rs[0].accuracy, rs[1].accuracy, rs[2].accuracy);
  };

  // Link-recovery oracle: Case 1 mean Jaccard >= 0.8 on >= 2 of 3 seeds.
  {
    int good = 0;
    std::string detail;
    for (const auto& r : reports[1]) {
      if (r.mean_jaccard >= 0.8) ++good;
      detail += fmt("%.3f ", r.mean_jaccard);
    }
    c.check(good >= 2, "benchmark/link-recovery",
            fmt("jaccard per seed: %s(need >=0.8 on >=2 seeds)", detail.c_str()));
  }

  // Case ordering on median accuracy.
  {
    const double a1 = acc_median(1), a2 = acc_median(2), a3 = acc_median(3),
                 a4 = acc_median(4);
    const bool ok = a1 >= a3 && a3 >= a4 && a1 >= a2 && (a1 - a4) >= 0.05;
    c.check(ok, "benchmark/case-ordering",
            fmt("medians c1=%.4f c2=%.4f c3=%.4f c4=%.4f (need c1>=c3>=c4, "
                "c1>=c2, c1-c4>=0.05)",
                a1, a2, a3, a4));
  }

  // Absolute floor and regression band for Case 1.
  {
    const double a1 = acc_median(1);
    c.check(a1 >= 0.90, "benchmark/accuracy-floor", fmt("case1 median=%.4f", a1));
    if (cfg.expected_case1_accuracy > 0) {
      c.check(std::abs(a1 - cfg.expected_case1_accuracy) <= 0.02,
              "benchmark/accuracy-regression-band",
              fmt("median=%.4f expected=%.4f +-0.02", a1,
                  cfg.expected_case1_accuracy));
    }
  }

  // Selected-link statistics for Case 1 (median seed by accuracy).
  {
    const auto& rs = reports[1];
    double sel = median3(rs[0].mean_selected_links, rs[1].mean_selected_links,
                         rs[2].mean_selected_links);
    // Activity ordering checked on each seed, majority vote.
    int dyn_ok = 0;
    std::string detail;
    for (const auto& r : rs) {
      const double walk = r.per_activity_links[0];
      const double run = r.per_activity_links[1];
      const double stand = r.per_activity_links[2];
      if (walk >= stand && run >= stand) ++dyn_ok;
      detail += fmt("[W=%.2f R=%.2f S=%.2f] ", walk, run, stand);
    }
    c.check(sel >= 1.5 && sel <= 3.5, "benchmark/selected-links-band",
            fmt("median mean_selected=%.2f (band [1.5, 3.5])", sel));
    c.check(dyn_ok >= 2, "benchmark/selected-links-dynamic-vs-static",
            fmt("%d/3 seeds with Walk,Run >= Stand; %s", dyn_ok, detail.c_str()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::string group = "math";
  std::string config_path = LINKSENSE_BENCHMARK_CONFIG;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--group") == 0 && i + 1 < argc) {
      group = argv[++i];
    } else if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) {
      config_path = argv[++i];
    } else {
      std::fprintf(stderr,
                   "usage: acceptance [--group math|gradients|bandit|"
                   "determinism|benchmark|all] [--config <file>]\n");
      return 1;
    }
  }

  Checker checker;
  try {
    if (group == "math" || group == "all") {
      const auto t0 = std::chrono::steady_clock::now();
      group_math(checker);
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      checker.check(elapsed < 1.0, "math/runtime",
                    fmt("%.3f s (budget 1)", elapsed));
    }
    if (group == "gradients" || group == "all") group_gradients(checker);
    if (group == "bandit" || group == "all") {
      const auto t0 = std::chrono::steady_clock::now();
      group_bandit(checker);
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      checker.check(elapsed < 60.0, "bandit/runtime",
                    fmt("%.3f s (budget 60)", elapsed));
    }
    if (group == "determinism" || group == "all") group_determinism(checker);
    if (group == "benchmark" || group == "all") group_benchmark(checker, config_path);
  } catch (const std::exception& e) {
    std::printf("FAIL  %s/unhandled-error  (%s)\n", group.c_str(), e.what());
    return 1;
  }
  if (checker.count == 0) {
    std::fprintf(stderr, "unknown group '%s'\n", group.c_str());
    return 1;
  }
  std::printf("%s  acceptance group '%s' (%d criteria)\n",
              checker.all_pass ? "PASS" : "FAIL", group.c_str(), checker.count);
  return checker.all_pass ? 0 : 1;
}
