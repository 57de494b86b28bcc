#ifndef DIRAC1D_H
#define DIRAC1D_H

/* This file is generated by cbindgen from dirac1d-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared by every entry point.  `OK` and the error classes
// up to `NUMERICAL_ABORT` mirror the CLI exit codes.
typedef enum Dirac1dStatus {
  DIRAC1D_STATUS_OK = 0,
  DIRAC1D_STATUS_VERDICT_FAILURE = 2,
  DIRAC1D_STATUS_CONFIG_ERROR = 3,
  DIRAC1D_STATUS_NUMERICAL_ABORT = 4,
  DIRAC1D_STATUS_NULL_ARGUMENT = 5,
  DIRAC1D_STATUS_INVALID_UTF8 = 6,
  DIRAC1D_STATUS_PANIC = 7,
} Dirac1dStatus;

// Opaque run configuration handle.
typedef struct Dirac1dConfig Dirac1dConfig;

// Derived model constants in the order (c, delta, c_star, k).
typedef struct Dirac1dConstants {
  double c;
  double delta;
  double c_star;
  double k;
} Dirac1dConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent error on this thread.  The pointer
// stays valid until the next failing call on the same thread.
const char *dirac1d_last_error(void);

// Library version as a static NUL-terminated string.
const char *dirac1d_version(void);

// Parse a TOML configuration from text into a new handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer; the
// returned handle must be released with `dirac1d_config_free`.
enum Dirac1dStatus dirac1d_config_parse(const char *text, struct Dirac1dConfig **out);

// Parse a TOML configuration from a file path.
//
// # Safety
// Same contract as `dirac1d_config_parse`.
enum Dirac1dStatus dirac1d_config_parse_file(const char *path, struct Dirac1dConfig **out);

// Release a configuration handle.  Null is accepted and ignored.
//
// # Safety
// `cfg` must be a handle from one of the parse functions, not yet freed.
void dirac1d_config_free(struct Dirac1dConfig *cfg);

// Run the experiment the configuration describes, writing artifacts
// (summary.json and the diagnostic CSVs) into `out_dir`.  When
// `has_seed` is true, `seed` overrides the configuration's seed.
//
// # Safety
// `cfg` must be a live handle and `out_dir` a NUL-terminated path.
enum Dirac1dStatus dirac1d_dispatch(const struct Dirac1dConfig *cfg,
                                    const char *out_dir,
                                    uint64_t seed,
                                    bool has_seed);

// Like `dirac1d_dispatch`, additionally returning the JSON summary as a
// newly allocated string in `json_out` (free with `dirac1d_string_free`;
// pass null to skip).
//
// # Safety
// Same contract as `dirac1d_dispatch`; `json_out`, when non-null, must
// be a valid pointer.
enum Dirac1dStatus dirac1d_dispatch_json(const struct Dirac1dConfig *cfg,
                                         const char *out_dir,
                                         uint64_t seed,
                                         bool has_seed,
                                         char **json_out);

// Free a string returned by `dirac1d_dispatch_json`.
//
// # Safety
// `s` must come from this library and not have been freed already.
void dirac1d_string_free(char *s);

// Derive the model constants (c, delta, c_star, K) for a preset.
// `preset` is "thirring" or "gross_neveu"; `samples` is the sampling
// budget (1e6 matches the CLI).
//
// # Safety
// `preset` must be NUL-terminated and `out` a valid pointer.
enum Dirac1dStatus dirac1d_model_constants(const char *preset,
                                           double alpha,
                                           double mass,
                                           size_t samples,
                                           uint64_t seed,
                                           struct Dirac1dConstants *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DIRAC1D_H */
