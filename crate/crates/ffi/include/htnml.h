#ifndef HTNML_H
#define HTNML_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HtnmlStatus {
  HTNML_STATUS_OK = 0,
  HTNML_STATUS_NULL_ARGUMENT = 1,
  HTNML_STATUS_INVALID_UTF8 = 2,
  HTNML_STATUS_INVALID_ARGUMENT = 3,
  HTNML_STATUS_PARSE_ERROR = 4,
  HTNML_STATUS_SPACE_ERROR = 5,
  HTNML_STATUS_SAMPLE_TOO_SMALL = 6,
  HTNML_STATUS_CONFIG_ERROR = 7,
  HTNML_STATUS_IO_ERROR = 8,
  HTNML_STATUS_SEARCH_FAILED = 9,
  HTNML_STATUS_PANIC = 10,
} HtnmlStatus;

/**
 * Opaque parsed dataset.
 */
typedef struct HtnmlDataset HtnmlDataset;

/**
 * Opaque component space.
 */
typedef struct HtnmlSpace HtnmlSpace;

/**
 * Test-set measures for one batch of predictions.
 */
typedef struct HtnmlMetrics {
  double subset_zero_one;
  double exact_match_accuracy;
  double hamming_loss;
  double instance_f_measure;
  double rank_loss;
  double rank_loss_raw;
  size_t rank_loss_undefined_instances;
} HtnmlMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *htnml_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *htnml_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void htnml_string_free(char *text);

/**
 * Parses multi-label ARFF text into a new dataset handle.
 */
enum HtnmlStatus htnml_dataset_parse_arff(const char *text, struct HtnmlDataset **out);

/**
 * Instance count, or 0 for a null handle.
 */
size_t htnml_dataset_n_instances(const struct HtnmlDataset *data);

/**
 * Label count, or 0 for a null handle.
 */
size_t htnml_dataset_n_labels(const struct HtnmlDataset *data);

/**
 * Feature attribute count (before encoding), or 0 for a null handle.
 */
size_t htnml_dataset_n_attributes(const struct HtnmlDataset *data);

/**
 * Copies the `n × m` label matrix, row-major, into `out` (`len` entries).
 */
enum HtnmlStatus htnml_dataset_labels(const struct HtnmlDataset *data, uint8_t *out, size_t len);

void htnml_dataset_free(struct HtnmlDataset *data);

/**
 * The built-in component space.
 */
enum HtnmlStatus htnml_space_default(struct HtnmlSpace **out);

/**
 * Parses a component space description.
 */
enum HtnmlStatus htnml_space_parse(const char *text, struct HtnmlSpace **out);

/**
 * Number of distinct pipelines the space admits.
 */
enum HtnmlStatus htnml_space_count_pipelines(const struct HtnmlSpace *space, uint64_t *out);

/**
 * Method listing of the space as a new string.
 */
enum HtnmlStatus htnml_space_listing(const struct HtnmlSpace *space, char **out);

void htnml_space_free(struct HtnmlSpace *space);

/**
 * Measures for `n × m` row-major truth and prediction bit matrices and
 * label scores.
 */
enum HtnmlStatus htnml_metrics(const uint8_t *truth,
                               const uint8_t *predicted,
                               const double *scores,
                               size_t n,
                               size_t m,
                               struct HtnmlMetrics *out);

/**
 * Welch's unequal-variance t-test; writes the statistic and two-sided p.
 */
enum HtnmlStatus htnml_welch_t_test(const double *a,
                                    size_t a_len,
                                    const double *b,
                                    size_t b_len,
                                    double *t_out,
                                    double *p_out);

/**
 * Runs one experiment from a JSON configuration and returns the JSON
 * report as a new string.
 */
enum HtnmlStatus htnml_run_experiment_json(const char *config, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HTNML_H */
