#ifndef UMLVAL_H
#define UMLVAL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum UmlvalStatus {
  UMLVAL_STATUS_OK = 0,
  UMLVAL_STATUS_NULL_ARGUMENT = 1,
  UMLVAL_STATUS_INVALID_UTF8 = 2,
  UMLVAL_STATUS_PARSE_ERROR = 3,
  UMLVAL_STATUS_CONFIG_ERROR = 4,
  UMLVAL_STATUS_UNKNOWN_CONFIG = 5,
  UMLVAL_STATUS_FINDER_ERROR = 6,
  UMLVAL_STATUS_UNKNOWN_INVARIANT = 7,
  UMLVAL_STATUS_INDEX_OUT_OF_RANGE = 8,
  UMLVAL_STATUS_PANIC = 9,
} UmlvalStatus;

typedef enum UmlvalVerdict {
  UMLVAL_VERDICT_SAT = 0,
  UMLVAL_VERDICT_UNSAT = 1,
  UMLVAL_VERDICT_TIMEOUT = 2,
} UmlvalVerdict;

// A set of named configurations.
typedef struct UmlvalConfigFile UmlvalConfigFile;

// A parsed model.
typedef struct UmlvalModel UmlvalModel;

// The outcome of one finder run.
typedef struct UmlvalResult UmlvalResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into the library from this thread.
const char *umlval_last_error(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void umlval_string_free(char *s);

// Library version, statically allocated.
const char *umlval_version(void);

// Parses model text. `file` names the source in diagnostics and may be null.
//
// # Safety
// Pointers must be valid NUL-terminated strings or null where allowed.
enum UmlvalStatus umlval_model_parse(const char *text, const char *file, struct UmlvalModel **out);

// # Safety
// `model` must come from [`umlval_model_parse`] and not have been freed.
void umlval_model_free(struct UmlvalModel *model);

// Static warnings for the model, one per paragraph. With a configuration
// the bitwidth check is included.
//
// # Safety
// Handles must be live; `configs` and `name` may be null.
enum UmlvalStatus umlval_model_warnings(const struct UmlvalModel *model,
                                        const struct UmlvalConfigFile *configs,
                                        const char *name,
                                        char **out);

// Parses a configuration file against `model`.
//
// # Safety
// Pointers must be valid; `file` may be null.
enum UmlvalStatus umlval_config_parse(const struct UmlvalModel *model,
                                      const char *text,
                                      const char *file,
                                      struct UmlvalConfigFile **out);

// A file holding only the model's default configuration, named `default`.
//
// # Safety
// `model` must be live.
enum UmlvalStatus umlval_config_default(const struct UmlvalModel *model,
                                        struct UmlvalConfigFile **out);

// # Safety
// `configs` must come from this library and not have been freed.
void umlval_config_free(struct UmlvalConfigFile *configs);

// Number of configurations in the file, 0 for null.
//
// # Safety
// `configs` must be live or null.
uintptr_t umlval_config_count(const struct UmlvalConfigFile *configs);

// Name of the configuration at `index`.
//
// # Safety
// `configs` must be live.
enum UmlvalStatus umlval_config_name(const struct UmlvalConfigFile *configs,
                                     uintptr_t index,
                                     char **out);

// Searches for a valid system state. `name` selects the configuration and
// may be null when the file holds exactly one. A `timeout_ms` of 0 means no
// deadline.
//
// # Safety
// Handles must be live.
enum UmlvalStatus umlval_find(const struct UmlvalModel *model,
                              const struct UmlvalConfigFile *configs,
                              const char *name,
                              uint64_t timeout_ms,
                              uint64_t seed,
                              bool randomize,
                              struct UmlvalResult **out);

// # Safety
// `result` must be live.
enum UmlvalVerdict umlval_result_verdict(const struct UmlvalResult *result);

// The found state as JSON. Fails unless the verdict is SAT.
//
// # Safety
// `result` must be live.
enum UmlvalStatus umlval_result_state_json(const struct UmlvalResult *result, char **out);

// The found state as a Graphviz digraph. Fails unless the verdict is SAT.
//
// # Safety
// `result` must be live.
enum UmlvalStatus umlval_result_state_dot(const struct UmlvalResult *result, char **out);

// Notes the finder logged, one per line.
//
// # Safety
// `result` must be live.
enum UmlvalStatus umlval_result_log(const struct UmlvalResult *result, char **out);

// # Safety
// `result` must come from [`umlval_find`] and not have been freed.
void umlval_result_free(struct UmlvalResult *result);

// Runs the consistency check (`invariant` null) or the independence check
// of one qualified invariant, and returns the report as JSON.
//
// # Safety
// Handles must be live; `name` and `invariant` may be null.
enum UmlvalStatus umlval_check(const struct UmlvalModel *model,
                               const struct UmlvalConfigFile *configs,
                               const char *name,
                               const char *invariant,
                               uint64_t timeout_ms,
                               char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UMLVAL_H */
