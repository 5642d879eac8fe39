/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the linksense core: synthetic multi-link Wi-Fi CSI
 * dataset generation, RL-based link selection training, evaluation and
 * benchmarking. All functions return LS_OK (0) on success or an error
 * code; ls_last_error() returns a thread-local message for the most
 * recent failure on the calling thread.
 */
#ifndef LINKSENSE_H
#define LINKSENSE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define LS_OK 0
#define LS_E_USAGE 1   /* bad arguments or configuration */
#define LS_E_DATA 2    /* dataset/model format problems */
#define LS_E_NUMERIC 3 /* numeric failure (NaN loss, failed check) */

const char* ls_version(void);

/* Message for the most recent error on this thread; empty string if none. */
const char* ls_last_error(void);

/* Opaque configuration handle. Keys follow the flat "key = value" config
 * format; unknown keys are rejected. */
typedef struct ls_config ls_config;

ls_config* ls_config_create(void);
void ls_config_destroy(ls_config* config);
int ls_config_load_file(ls_config* config, const char* path);
int ls_config_set(ls_config* config, const char* key, const char* value);
/* Returns the value for a known key as a string into buf (null-terminated,
 * truncated to buf_len). */
int ls_config_get(const ls_config* config, const char* key, char* buf,
                  uint64_t buf_len);

/* Writes a dataset directory (manifest.json plus train.csd/test.csd).
 * virtual_samples != 0 writes a manifest-only directory whose samples are
 * regenerated on demand. */
int ls_generate_dataset(const ls_config* config, const char* out_dir,
                        uint64_t seed, int virtual_samples);

/* Trains one case (1..5) with one classification network (1..4).
 * epochs <= 0 keeps the configured default. Writes checkpoint.json/.bin,
 * train_summary.json and loss.csv into out_dir. */
int ls_train(const ls_config* config, const char* data_dir, int case_id,
             int cnn_id, const char* out_dir, int epochs, uint64_t seed);

/* Greedy evaluation over the test split; writes a JSON report. */
int ls_evaluate(const ls_config* config, const char* model_dir,
                const char* data_dir, int case_id, const char* report_path);

/* Per-sample decision/classification timing; writes a JSON report. */
int ls_bench(const ls_config* config, const char* model_dir,
             const char* data_dir, int case_id, const char* report_path);

/* Finite-difference gradient validation of every layer kind and every
 * architecture. Writes a text report (or prints to stdout when path is
 * NULL); returns LS_E_NUMERIC if any check exceeds tolerance. */
int ls_grad_check(const char* report_path);

#ifdef __cplusplus
}
#endif

#endif /* LINKSENSE_H */
