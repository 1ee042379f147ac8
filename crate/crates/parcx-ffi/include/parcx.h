#ifndef PARCX_H
#define PARCX_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ParcxStatus {
  PARCX_STATUS_OK = 0,
  /**
   * The computation ran and the verification did not pass.
   */
  PARCX_STATUS_VERIFICATION_FAILED = 1,
  PARCX_STATUS_USAGE = 2,
  PARCX_STATUS_CAPACITY = 3,
  PARCX_STATUS_DOMAIN = 4,
  PARCX_STATUS_CONTAINMENT = 5,
  PARCX_STATUS_INTEGRITY = 6,
  PARCX_STATUS_NULL_POINTER = 7,
  PARCX_STATUS_INVALID_UTF8 = 8,
  PARCX_STATUS_PANIC = 9,
} ParcxStatus;

/**
 * A simplicial complex with a symmetric group action.
 */
typedef struct ParcxComplex ParcxComplex;

/**
 * Graded homology groups.
 */
typedef struct ParcxHomology ParcxHomology;

/**
 * A verification report, kept as JSON with its verdict.
 */
typedef struct ParcxReport ParcxReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *parcx_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *parcx_last_error(void);

/**
 * Builds the order complex of proper nontrivial partitions of `{1..n}`, or
 * its suspension pointed at the south pole when `suspended` is set.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum ParcxStatus parcx_partition_complex(size_t n, bool suspended, struct ParcxComplex **out);

/**
 * Number of `q`-simplices; zero above the dimension.
 *
 * # Safety
 * `c` must be a live handle and `out` writable.
 */
enum ParcxStatus parcx_complex_count(const struct ParcxComplex *c, size_t q, size_t *out);

/**
 * Order of the acting group.
 *
 * # Safety
 * `c` must be a live handle and `out` writable.
 */
enum ParcxStatus parcx_complex_group_order(const struct ParcxComplex *c, size_t *out);

/**
 * # Safety
 * `c` must be null or a handle from this library that has not been freed.
 */
void parcx_complex_free(struct ParcxComplex *c);

/**
 * Bredon homology (or cohomology when `cohomology` is set) of the partition
 * complex with coefficients named as on the command line, for example
 * `"fp-sign"` or `"borel:4,2,1,6"`.
 *
 * # Safety
 * `coeff` must be a nul-terminated string and `out` writable.
 */
enum ParcxStatus parcx_bredon(size_t n,
                              size_t p,
                              const char *coeff,
                              size_t degree,
                              bool reduced,
                              bool cohomology,
                              struct ParcxHomology **out);

/**
 * Number of degrees in the table.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum ParcxStatus parcx_homology_len(const struct ParcxHomology *h, size_t *out);

/**
 * Free rank and number of torsion factors in degree `q`.
 *
 * # Safety
 * `h` must be a live handle; `rank` and `torsion_len` writable.
 */
enum ParcxStatus parcx_homology_degree(const struct ParcxHomology *h,
                                       size_t q,
                                       size_t *rank,
                                       size_t *torsion_len);

/**
 * The `i`-th torsion factor in degree `q`.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum ParcxStatus parcx_homology_torsion(const struct ParcxHomology *h,
                                        size_t q,
                                        size_t i,
                                        uint64_t *out);

/**
 * # Safety
 * `h` must be null or a handle from this library that has not been freed.
 */
void parcx_homology_free(struct ParcxHomology *h);

/**
 * Rank of the Steinberg module of `GL_k(F_p)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ParcxStatus parcx_steinberg_rank(size_t k, size_t p, size_t *out);

/**
 * Compares both sides of the main statement. A report is produced whether or
 * not it passes; the status is `VerificationFailed` when it does not.
 *
 * # Safety
 * `coeff` must be a nul-terminated string and `out` writable.
 */
enum ParcxStatus parcx_verify_main_theorem(size_t n,
                                           size_t p,
                                           const char *coeff,
                                           struct ParcxReport **out);

/**
 * Runs the acceptance suite for `n ≤ max_n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ParcxStatus parcx_verify_all(size_t max_n, struct ParcxReport **out);

/**
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum ParcxStatus parcx_report_passed(const struct ParcxReport *r, bool *out);

/**
 * JSON text of the report, borrowed from the handle.
 *
 * # Safety
 * `r` must be a live handle. The string is valid until the handle is freed.
 */
const char *parcx_report_json(const struct ParcxReport *r);

/**
 * # Safety
 * `r` must be null or a handle from this library that has not been freed.
 */
void parcx_report_free(struct ParcxReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARCX_H */
