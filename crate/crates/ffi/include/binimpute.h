#ifndef BINIMPUTE_H
#define BINIMPUTE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum BmStatus {
  BM_STATUS_OK = 0,
  BM_STATUS_NULL_POINTER = 1,
  BM_STATUS_INVALID_ARGUMENT = 2,
  BM_STATUS_DOMAIN = 3,
  BM_STATUS_NO_OBSERVED_DATA = 4,
  BM_STATUS_UNDEFINED = 5,
  BM_STATUS_INTERNAL = 6,
} BmStatus;

// Opaque configuration handle.
typedef struct BmConfig BmConfig;

// Interval estimate for one method on one dataset.
typedef struct BmInterval {
  double estimate;
  double lower;
  double upper;
  double length;
  // Nonzero when the method fell back to the trivial interval [0, 1].
  int32_t fallback;
} BmInterval;

// Monte Carlo summary of one method in one scenario.
typedef struct BmScenarioResult {
  // Mean interval length over replicates where the method was defined.
  double avg_length;
  // Fraction of defined replicates whose interval contains the true rate.
  double coverage;
  uint64_t replicates;
  uint64_t undefined_count;
} BmScenarioResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a configuration with default settings. Release with [`bm_config_free`].
struct BmConfig *bm_config_new(void);

// Release a handle from [`bm_config_new`]. Null is ignored.
//
// # Safety
// `cfg` must be null or a handle not yet freed.
void bm_config_free(struct BmConfig *cfg);

// Set one configuration value from its text form.
//
// Keys: `D`, `DD`, `M`, `boot`, `grid_step`, `alpha`, `seed`,
// `inflate_between` (`true`/`false`), `prior` (`a,b,a',b'`), `missing_mode`,
// and the method options `cpmi_form`, `cpmi_df`, `wilson_quantile`,
// `logit_boundary`, `logit_df`, `jackknife_imputation`,
// `jackknife_denominator`, `beta_mi_center`, `bayes_summary`. Invalid values
// leave the handle unchanged.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` nul-terminated strings.
enum BmStatus bm_config_set(struct BmConfig *cfg, const char *key, const char *value);

// Write the resolved configuration as JSON into `buf` (nul-terminated,
// truncated to `len` bytes). Returns the full length excluding the nul, or
// -1 if `cfg` is null.
//
// # Safety
// `cfg` must be a live handle; `buf` null or writable for `len` bytes.
int64_t bm_config_to_json(const struct BmConfig *cfg, char *buf, size_t len);

// Estimate the success rate with one method. `method` is a method id such
// as `"full-bayes"`; see [`bm_method_name`].
//
// # Safety
// `cfg` must be a live handle, `method` a nul-terminated string and `out`
// writable.
enum BmStatus bm_analyze(struct BmConfig *cfg,
                         const char *method,
                         uint32_t successes,
                         uint32_t failures,
                         uint32_t missing,
                         struct BmInterval *out);

// Monte Carlo coverage and average length of one method in one scenario.
//
// # Safety
// `cfg` must be a live handle, `method` a nul-terminated string and `out`
// writable.
enum BmStatus bm_run_scenario(struct BmConfig *cfg,
                              const char *method,
                              double true_rate,
                              uint32_t n,
                              double missing_rate,
                              uint64_t replicates,
                              struct BmScenarioResult *out);

// Number of available methods.
size_t bm_method_count(void);

// Id of method `index`, or null when out of range. The string is static.
const char *bm_method_name(size_t index);

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call on this thread.
const char *bm_last_error_message(void);

// Library version string. The string is static.
const char *bm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BINIMPUTE_H */
