#ifndef UNISEL_H
#define UNISEL_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UniselMode {
  UNISEL_MODE_EXACT = 0,
  UNISEL_MODE_FLOAT = 1,
} UniselMode;

/**
 * Result codes. A report with failing checks is still `Ok`; inspect it with
 * [`unisel_report_passed`].
 */
typedef enum UniselStatus {
  UNISEL_STATUS_OK = 0,
  UNISEL_STATUS_NULL_POINTER = 1,
  UNISEL_STATUS_INVALID_UTF8 = 2,
  UNISEL_STATUS_PARSE_ERROR = 3,
  UNISEL_STATUS_INPUT_ERROR = 4,
  UNISEL_STATUS_UNKNOWN_COMMAND = 5,
  UNISEL_STATUS_PANIC = 6,
} UniselStatus;

/**
 * A parsed instance bundle.
 */
typedef struct UniselBundle UniselBundle;

/**
 * A finished verification report.
 */
typedef struct UniselReport UniselReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *unisel_version(void);

/**
 * Message of the last failed call on this thread, or null. Borrowed: valid
 * until the next call on this thread.
 */
const char *unisel_last_error(void);

/**
 * Parses a bundle document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum UniselStatus unisel_bundle_parse(const char *json, struct UniselBundle **out);

/**
 * # Safety
 * `bundle` must be null or a handle from [`unisel_bundle_parse`] not yet freed.
 */
void unisel_bundle_free(struct UniselBundle *bundle);

/**
 * Runs the full invariant suite on a bundle.
 *
 * # Safety
 * `bundle` must be a live handle and `out` a valid pointer.
 */
enum UniselStatus unisel_verify_all(const struct UniselBundle *bundle,
                                    enum UniselMode mode,
                                    uint64_t seed,
                                    struct UniselReport **out);

/**
 * Runs one command (`"mather"`, `"map-classify"`, `"select-eps"`, ...) on a
 * JSON document, with the same semantics as the command line tool.
 *
 * # Safety
 * `command` and `input` must be valid NUL-terminated strings and `out` a
 * valid pointer.
 */
enum UniselStatus unisel_run(const char *command,
                             const char *input,
                             enum UniselMode mode,
                             uint64_t seed,
                             struct UniselReport **out);

/**
 * Report JSON. Borrowed: valid until the report is freed.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
const char *unisel_report_json(const struct UniselReport *report);

/**
 * True iff no check failed.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
bool unisel_report_passed(const struct UniselReport *report);

/**
 * Exit code the command line tool would return: 0 or 1.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t unisel_report_exit_code(const struct UniselReport *report);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void unisel_report_free(struct UniselReport *report);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* UNISEL_H */
