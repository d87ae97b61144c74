#ifndef REGIONCALC_H
#define REGIONCALC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcMode {
  RC_MODE_PLAIN = 0,
  RC_MODE_CONFLUENT = 1,
  RC_MODE_EFFECTS = 2,
  RC_MODE_STRATIFIED = 3,
  RC_MODE_STRATIFIED_CONFLUENT = 4,
} RcMode;

typedef enum RcStatus {
  RC_STATUS_OK = 0,
  /**
   * The type checker rejected the unit.
   */
  RC_STATUS_REJECTED = 1,
  /**
   * A run exceeded its budget or hit a runtime error.
   */
  RC_STATUS_VIOLATION = 2,
  RC_STATUS_INVALID_ARGUMENT = 3,
  RC_STATUS_PARSE_ERROR = 4,
  /**
   * A bug in the library; the message says where.
   */
  RC_STATUS_INTERNAL = 5,
} RcStatus;

/**
 * A parsed source unit.
 */
typedef struct RcUnit RcUnit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a unit from NUL-terminated UTF-8 source.
 *
 * # Safety
 * `src` must be a valid C string and `out` a valid pointer.
 */
enum RcStatus rc_unit_parse(const char *src, struct RcUnit **out);

/**
 * Releases a unit. Null is ignored.
 *
 * # Safety
 * `handle` must be null or come from `rc_unit_parse`, and is invalid after.
 */
void rc_unit_free(struct RcUnit *handle);

/**
 * Type-checks `handle` in `mode` and writes a JSON report to `out_json`.
 * The report is written for rejections too.
 *
 * # Safety
 * `handle` must be a live unit and `out_json` a valid pointer.
 */
enum RcStatus rc_check_json(const struct RcUnit *handle, enum RcMode mode, char **out_json);

/**
 * Runs the unit's program with the leftmost scheduler for at most `budget`
 * steps. Writes the number of steps and the final program.
 *
 * # Safety
 * `handle` must be a live unit; the out pointers must be valid.
 */
enum RcStatus rc_eval(const struct RcUnit *handle,
                      uint64_t budget,
                      uint64_t *out_steps,
                      char **out_final);

/**
 * Explores every interleaving and writes a JSON summary.
 *
 * # Safety
 * `handle` must be a live unit and `out_json` a valid pointer.
 */
enum RcStatus rc_explore_json(const struct RcUnit *handle,
                              uint64_t depth,
                              uint64_t width,
                              char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string handed out by this library.
 */
void rc_string_free(char *s);

/**
 * The message of the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *rc_last_error_message(void);

/**
 * Library version, static.
 */
const char *rc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGIONCALC_H */
