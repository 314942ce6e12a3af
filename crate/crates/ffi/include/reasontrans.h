#ifndef REASONTRANS_H
#define REASONTRANS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum rt_status {
  RT_OK = 0,
  /**
   * A required pointer was NULL.
   */
  RT_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RT_INVALID_UTF8 = 2,
  /**
   * A JSON argument did not parse or did not match the expected shape.
   */
  RT_INVALID_JSON = 3,
  /**
   * An argument was out of range or otherwise rejected.
   */
  RT_INVALID_ARGUMENT = 4,
  RT_UNSUPPORTED_LANGUAGE = 5,
  /**
   * The compiler or interpreter for the language is missing.
   */
  RT_TOOLCHAIN_UNAVAILABLE = 6,
  RT_PANIC = 7,
} rt_status;

/**
 * Opaque sandbox executor. Safe to share across threads.
 */
typedef struct rt_executor rt_executor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL.
 */
const char *rt_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void rt_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *rt_version(void);

/**
 * Length reward for a completion of `completion_len` units against a
 * reference of `reference_len` units.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum rt_status rt_length_reward(uint64_t completion_len,
                                uint64_t reference_len,
                                double tolerance,
                                uint64_t max_length,
                                double *out);

/**
 * Creates an executor. `limits_json` may be NULL for default limits, or an
 * object with any of `wall_timeout_s`, `per_case_timeout_s`,
 * `compile_timeout_s` and `max_output_bytes`.
 *
 * # Safety
 * `limits_json` must be NULL or a NUL-terminated string; `out` must be valid.
 */
enum rt_status rt_executor_new(const char *limits_json, struct rt_executor **out);

/**
 * Destroys an executor. NULL is ignored.
 *
 * # Safety
 * `executor` must come from [`rt_executor_new`] and not be used afterwards.
 */
void rt_executor_free(struct rt_executor *executor);

/**
 * Runs `code` against the suite and writes `passed / total` to
 * `out_reward`. A missing toolchain is an error; code that fails to
 * compile or raises scores 0. When `out_report_json` is not NULL it
 * receives the full test report as JSON.
 *
 * # Safety
 * `executor` must be live; string arguments NUL-terminated; `out_reward`
 * valid.
 */
enum rt_status rt_execution_reward(const struct rt_executor *executor,
                                   const char *code,
                                   const char *language,
                                   const char *suite_json,
                                   double *out_reward,
                                   char **out_report_json);

/**
 * CodeBLEU of `hypothesis` against `reference`. `weights_json` may be NULL
 * for equal weights. Writes the total to `out_total` when not NULL and the
 * component breakdown as JSON to `out_json` when not NULL.
 *
 * # Safety
 * String arguments must be NUL-terminated; output pointers NULL or valid.
 */
enum rt_status rt_codebleu(const char *hypothesis,
                           const char *reference,
                           const char *language,
                           const char *weights_json,
                           double *out_total,
                           char **out_json);

/**
 * Splits a raw completion into reasoning and code for `language`. The
 * result is a JSON object with `reasoning`, `code`, `raw` and
 * `extraction_method`.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out_json` valid.
 */
enum rt_status rt_parse_completion(const char *raw, const char *language, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REASONTRANS_H */
