#ifndef CONTEXTUALITY_H
#define CONTEXTUALITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CtxStatus {
  CTX_STATUS_OK = 0,
  CTX_STATUS_NULL_POINTER = 1,
  CTX_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or rational text.
   */
  CTX_STATUS_PARSE = 3,
  /**
   * Well-formed input that violates a precondition.
   */
  CTX_STATUS_INVALID_INPUT = 4,
  /**
   * The computation itself failed.
   */
  CTX_STATUS_DOMAIN = 5,
  CTX_STATUS_PANIC = 6,
} CtxStatus;

typedef enum CtxMethod {
  CTX_METHOD_DOUBLE_DESCRIPTION = 0,
  CTX_METHOD_SUPPORT = 1,
} CtxMethod;

/**
 * Opaque scenario handle.
 */
typedef struct CtxScenario CtxScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call into this library on the same thread.
 */
const char *ctx_last_error(void);

/**
 * Parses and validates a scenario (`{"vertices": [...], "edges": [[...]]}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CtxStatus ctx_scenario_from_json(const char *json, struct CtxScenario **out);

/**
 * # Safety
 * `h` must be NULL or a handle from [`ctx_scenario_from_json`] not yet freed.
 */
void ctx_scenario_free(struct CtxScenario *h);

/**
 * Number of vertices, or 0 for a NULL handle.
 *
 * # Safety
 * `h` must be NULL or a live handle.
 */
size_t ctx_scenario_num_vertices(const struct CtxScenario *h);

/**
 * # Safety
 * `h` must be NULL or a live handle.
 */
size_t ctx_scenario_num_edges(const struct CtxScenario *h);

/**
 * Extremal models as `{"count": n, "vertices": [{"values": ..., "vector": ...}]}`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum CtxStatus ctx_enumerate_extremal(const struct CtxScenario *h,
                                      enum CtxMethod method,
                                      char **out);

/**
 * Classification report for a model file or behavior file.
 *
 * # Safety
 * `h` live; `model_json` NUL-terminated; `out` writable.
 */
enum CtxStatus ctx_classify(const struct CtxScenario *h, const char *model_json, char **out);

/**
 * Basis of the kernel of the incidence matrix, as vector strings.
 *
 * # Safety
 * `h` live; `out` writable.
 */
enum CtxStatus ctx_null_space(const struct CtxScenario *h, char **out);

/**
 * Triviality certificate of a realization (or a `search` output) against
 * a model, with certificate tolerance `tol`.
 *
 * # Safety
 * `h` live; both strings NUL-terminated; `out` writable.
 */
enum CtxStatus ctx_certify_trivial(const struct CtxScenario *h,
                                   const char *model_json,
                                   const char *realization_json,
                                   double tol,
                                   char **out);

/**
 * One Dykstra run with the maximally mixed state of dimension `dim`.
 *
 * # Safety
 * `h` live; `model_json` NUL-terminated; `out` writable.
 */
enum CtxStatus ctx_search(const struct CtxScenario *h,
                          const char *model_json,
                          size_t dim,
                          uint64_t seed,
                          size_t max_iter,
                          double tol,
                          char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void ctx_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTEXTUALITY_H */
