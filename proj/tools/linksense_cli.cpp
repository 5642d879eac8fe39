// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the core exclusively through the
// shared-library C interface.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "linksense.h"

namespace {

struct ConfigHandle {
  ls_config* ptr = ls_config_create();
  ~ConfigHandle() { ls_config_destroy(ptr); }
};

int report_error(int code) {
  if (code != LS_OK) std::fprintf(stderr, "error: %s\n", ls_last_error());
  return code;
}

int load_config(ls_config* config, const std::string& path) {
  if (path.empty()) return LS_OK;
  return report_error(ls_config_load_file(config, path.c_str()));
}

int apply_sets(ls_config* config, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return LS_E_USAGE;
    }
    const int rc = ls_config_set(config, kv.substr(0, eq).c_str(),
                                 kv.substr(eq + 1).c_str());
    if (rc != LS_OK) return report_error(rc);
  }
  return LS_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-link Wi-Fi sensing with RL link selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ls_version()));

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Flat key = value configuration file")
      ->expected(1);
  app.add_option("--set", sets, "Override one configuration key (key=value)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic CSI dataset");
  std::string gen_out;
  std::uint64_t gen_seed = 1;
  bool gen_virtual = false;
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->add_option("--seed", gen_seed, "Dataset seed");
  gen->add_flag("--virtual", gen_virtual,
                "Write a manifest-only dataset regenerated on demand");

  // train
  auto* train = app.add_subcommand("train", "Train one case");
  std::string train_data, train_out;
  int train_case_id = 1, train_cnn = 4, train_epochs = -1;
  std::uint64_t train_seed = 1;
  train->add_option("--data", train_data, "Dataset directory")->required();
  train->add_option("--case", train_case_id, "Case 1..5")->required();
  train->add_option("--cnn", train_cnn, "Classification network 1..4");
  train->add_option("--out", train_out, "Model output directory")->required();
  train->add_option("--epochs", train_epochs, "Epoch budget override");
  train->add_option("--seed", train_seed, "Training seed");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a trained model");
  std::string eval_model, eval_data, eval_report;
  int eval_case_id = 1;
  eval->add_option("--model", eval_model, "Model directory")->required();
  eval->add_option("--data", eval_data, "Dataset directory")->required();
  eval->add_option("--case", eval_case_id, "Case 1..5")->required();
  eval->add_option("--report", eval_report, "Report JSON path")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Time decision/classification");
  std::string bench_model, bench_data, bench_report;
  int bench_case_id = 1;
  bench->add_option("--model", bench_model, "Model directory")->required();
  bench->add_option("--data", bench_data, "Dataset directory")->required();
  bench->add_option("--case", bench_case_id, "Case 1..5")->required();
  bench->add_option("--report", bench_report, "Report JSON path (optional)");

  // gradcheck
  auto* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference gradient validation");
  std::string gradcheck_report;
  gradcheck->add_option("--report", gradcheck_report, "Report path (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : LS_E_USAGE;
  }

  ConfigHandle config;
  int rc = load_config(config.ptr, config_path);
  if (rc != LS_OK) return rc;
  rc = apply_sets(config.ptr, sets);
  if (rc != LS_OK) return rc;

  if (gen->parsed()) {
    return report_error(ls_generate_dataset(config.ptr, gen_out.c_str(), gen_seed,
                                            gen_virtual ? 1 : 0));
  }
  if (train->parsed()) {
    return report_error(ls_train(config.ptr, train_data.c_str(), train_case_id,
                                 train_cnn, train_out.c_str(), train_epochs,
                                 train_seed));
  }
  if (eval->parsed()) {
    return report_error(ls_evaluate(config.ptr, eval_model.c_str(),
                                    eval_data.c_str(), eval_case_id,
                                    eval_report.c_str()));
  }
  if (bench->parsed()) {
    return report_error(ls_bench(config.ptr, bench_model.c_str(),
                                 bench_data.c_str(), bench_case_id,
                                 bench_report.empty() ? nullptr
                                                      : bench_report.c_str()));
  }
  if (gradcheck->parsed()) {
    return report_error(ls_grad_check(
        gradcheck_report.empty() ? nullptr : gradcheck_report.c_str()));
  }
  return LS_E_USAGE;
}
