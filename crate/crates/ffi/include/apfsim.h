#ifndef APFSIM_H
#define APFSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApfStatus {
  APF_STATUS_OK = 0,
  APF_STATUS_NULL_POINTER = 1,
  APF_STATUS_INVALID_UTF8 = 2,
  APF_STATUS_INVALID_CONFIG = 3,
  APF_STATUS_INVALID_INPUT = 4,
  APF_STATUS_OUT_OF_RANGE = 5,
  APF_STATUS_BUFFER_TOO_SMALL = 6,
  APF_STATUS_RUNTIME = 7,
  APF_STATUS_PANIC = 8,
} ApfStatus;

typedef enum ApfStrategy {
  APF_STRATEGY_EMD_HYBRID = 0,
  APF_STRATEGY_PLAIN_MODIFIED_PQ = 1,
} ApfStrategy;

// IMFs and residue of one decomposition.
typedef struct ApfImfSet ApfImfSet;

// Scenario configuration.
typedef struct ApfScenario ApfScenario;

// Result of one simulation run.
typedef struct ApfTrace ApfTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into this library on the same thread.
const char *apf_last_error(void);

// Release a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void apf_string_free(char *s);

// Default scenario.
//
// # Safety
// `out` must be a valid pointer.
enum ApfStatus apf_scenario_default(struct ApfScenario **out);

// Parse and validate a scenario from JSON; omitted fields take defaults.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum ApfStatus apf_scenario_from_json(const char *json, struct ApfScenario **out);

// Full scenario as JSON.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum ApfStatus apf_scenario_to_json(const struct ApfScenario *scenario, char **out);

// Override the disturbance seed.
//
// # Safety
// `scenario` must be a live handle.
enum ApfStatus apf_scenario_set_seed(struct ApfScenario *scenario, uint64_t seed);

// # Safety
// `scenario` must come from this library and not be freed twice.
void apf_scenario_free(struct ApfScenario *scenario);

// Run one strategy.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum ApfStatus apf_simulate(const struct ApfScenario *scenario,
                            enum ApfStrategy strategy,
                            struct ApfTrace **out);

// Run both strategies and return the comparison table as JSON.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum ApfStatus apf_compare_json(const struct ApfScenario *scenario, char **out);

// Number of samples in the trace; 0 for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
uintptr_t apf_trace_len(const struct ApfTrace *trace);

// Number of trace columns.
uintptr_t apf_trace_column_count(void);

// Name of column `index` as a static NUL-terminated string, or null when out
// of range.
const char *apf_trace_column_name(uintptr_t index);

// Copy the named column into `buf`, which must hold `apf_trace_len` values.
//
// # Safety
// `trace` must be a live handle, `name` a NUL-terminated string and `buf`
// valid for `len` writes.
enum ApfStatus apf_trace_column(const struct ApfTrace *trace,
                                const char *name,
                                double *buf,
                                uintptr_t len);

// Whole trace as CSV text.
//
// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum ApfStatus apf_trace_to_csv(const struct ApfTrace *trace, char **out);

// # Safety
// `trace` must come from this library and not be freed twice.
void apf_trace_free(struct ApfTrace *trace);

// Decompose `len` samples taken at `sample_rate` with default EMD settings.
//
// # Safety
// `samples` must be valid for `len` reads and `out` a valid pointer.
enum ApfStatus apf_emd_decompose(const double *samples,
                                 uintptr_t len,
                                 double sample_rate,
                                 struct ApfImfSet **out);

// Number of IMFs, excluding the residue; 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
uintptr_t apf_imf_count(const struct ApfImfSet *set);

// Samples per IMF; 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
uintptr_t apf_imf_len(const struct ApfImfSet *set);

// Copy IMF `index` (0-based, fastest first) into `buf`.
//
// # Safety
// `set` must be a live handle and `buf` valid for `len` writes.
enum ApfStatus apf_imf_get(const struct ApfImfSet *set,
                           uintptr_t index,
                           double *buf,
                           uintptr_t len);

// Copy the residue into `buf`.
//
// # Safety
// `set` must be a live handle and `buf` valid for `len` writes.
enum ApfStatus apf_imf_residue(const struct ApfImfSet *set, double *buf, uintptr_t len);

// # Safety
// `set` must come from this library and not be freed twice.
void apf_imf_set_free(struct ApfImfSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APFSIM_H */
