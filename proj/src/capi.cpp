// SPDX-License-Identifier: Apache-2.0
#include "linksense.h"

#include <cstdio>
#include <cstring>
#include <string>

#include "linksense/harness/gradcheck_cmd.hpp"
#include "linksense/harness/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LS_OK;
  } catch (const linksense::Error& e) {
    return fail(linksense::exit_code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(LS_E_USAGE, e.what());
  }
}

}  // namespace

struct ls_config {
  linksense::harness::HarnessConfig config;
};

extern "C" {

const char* ls_version(void) { return "0.1.0"; }

const char* ls_last_error(void) { return g_last_error.c_str(); }

ls_config* ls_config_create(void) { return new ls_config(); }

void ls_config_destroy(ls_config* config) { delete config; }

int ls_config_load_file(ls_config* config, const char* path) {
  if (!config || !path) return fail(LS_E_USAGE, "null argument");
  return guarded([&] {
    config->config = linksense::harness::load_config_file(path);
  });
}

int ls_config_set(ls_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(LS_E_USAGE, "null argument");
  return guarded([&] {
    linksense::harness::apply_config_entry(config->config, key, value);
    config->config.validate();
  });
}

int ls_config_get(const ls_config* config, const char* key, char* buf,
                  uint64_t buf_len) {
  if (!config || !key || !buf || buf_len == 0) {
    return fail(LS_E_USAGE, "null argument");
  }
  return guarded([&] {
    const auto& c = config->config;
    const std::string k(key);
    std::string v;
    if (k == "noise_floor") v = std::to_string(c.env.noise_floor);
    else if (k == "relevance_threshold") v = std::to_string(c.env.relevance_threshold);
    else if (k == "train_count") v = std::to_string(c.train_count);
    else if (k == "test_count") v = std::to_string(c.test_count);
    else if (k == "window") v = std::to_string(c.window);
    else if (k == "batch_size") v = std::to_string(c.batch_size);
    else if (k == "learning_rate") v = std::to_string(c.learning_rate);
    else if (k == "epochs") v = std::to_string(c.epochs);
    else if (k == "expected_case1_accuracy") v = std::to_string(c.expected_case1_accuracy);
    else throw linksense::ConfigError("ls_config_get: unsupported key '" + k + "'");
    std::snprintf(buf, buf_len, "%s", v.c_str());
  });
}

int ls_generate_dataset(const ls_config* config, const char* out_dir,
                        uint64_t seed, int virtual_samples) {
  if (!config || !out_dir) return fail(LS_E_USAGE, "null argument");
  return guarded([&] {
    linksense::harness::run_generate(config->config, out_dir, seed,
                                     virtual_samples != 0);
  });
}

int ls_train(const ls_config* config, const char* data_dir, int case_id,
             int cnn_id, const char* out_dir, int epochs, uint64_t seed) {
  if (!config || !data_dir || !out_dir) return fail(LS_E_USAGE, "null argument");
  return guarded([&] {
    (void)linksense::harness::run_train(config->config, data_dir, case_id, cnn_id,
                                        out_dir, epochs, seed);
  });
}

int ls_evaluate(const ls_config* config, const char* model_dir,
                const char* data_dir, int case_id, const char* report_path) {
  if (!config || !model_dir || !data_dir || !report_path) {
    return fail(LS_E_USAGE, "null argument");
  }
  return guarded([&] {
    (void)linksense::harness::run_eval(config->config, model_dir, data_dir,
                                       case_id, report_path);
  });
}

int ls_bench(const ls_config* config, const char* model_dir,
             const char* data_dir, int case_id, const char* report_path) {
  if (!config || !model_dir || !data_dir) return fail(LS_E_USAGE, "null argument");
  return guarded([&] {
    (void)linksense::harness::run_bench(config->config, model_dir, data_dir,
                                        case_id,
                                        report_path ? report_path : "");
  });
}

int ls_grad_check(const char* report_path) {
  bool ok = false;
  const int rc = guarded([&] {
    const auto summary = linksense::harness::run_grad_checks();
    const std::string text = linksense::harness::format_grad_checks(summary);
    if (report_path) {
      std::FILE* f = std::fopen(report_path, "w");
      if (!f) throw linksense::FormatError(std::string("cannot write ") + report_path);
      std::fputs(text.c_str(), f);
      std::fclose(f);
    } else {
      std::fputs(text.c_str(), stdout);
    }
    ok = summary.all_pass;
  });
  if (rc != LS_OK) return rc;
  return ok ? LS_OK : fail(LS_E_NUMERIC, "gradient checks exceeded tolerance");
}

}  // extern "C"
