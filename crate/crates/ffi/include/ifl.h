#ifndef IFL_H
#define IFL_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IflStatus {
  IFL_STATUS_OK = 0,
  IFL_STATUS_NULL_POINTER = 1,
  IFL_STATUS_INVALID_UTF8 = 2,
  IFL_STATUS_PARSE = 3,
  IFL_STATUS_BAD_INPUT = 4,
  IFL_STATUS_CAP_EXCEEDED = 5,
  IFL_STATUS_UNVERIFIED = 6,
  IFL_STATUS_FAILED = 7,
  IFL_STATUS_PANIC = 8,
} IflStatus;

// Opaque finite subgroup of SL2 over a ring.
typedef struct IflGroup IflGroup;

// Opaque truncated q-expansion.
typedef struct IflQExpansion IflQExpansion;

// Opaque coefficient ring.
typedef struct IflRing IflRing;

// Message of the last failed call on this thread; empty after a success. Borrowed, do not free.
const char *ifl_last_error(void);

// # Safety
// `s` must come from this library or be null.
void ifl_string_free(char *s);

// Parse a `key=value` ring description.
//
// # Safety
// `spec` must be a valid C string; `out` must be writable.
enum IflStatus ifl_ring_parse(const char *spec, struct IflRing **out);

// (Z/p^a)[T]/(T^b).
//
// # Safety
// `out` must be writable.
enum IflStatus ifl_ring_trunc_iwasawa(uint64_t p, uint32_t a, size_t b, struct IflRing **out);

// Number of elements; saturates at `u64::MAX`.
//
// # Safety
// `ring` must be a live handle; `out` writable.
enum IflStatus ifl_ring_size(const struct IflRing *ring, uint64_t *out);

// Human-readable label such as `(Z/3)[T]/(T^3)`.
//
// # Safety
// `ring` must be a live handle; `out` writable.
enum IflStatus ifl_ring_label(const struct IflRing *ring, char **out);

// # Safety
// `ring` must come from this library or be null.
void ifl_ring_free(struct IflRing *ring);

// Subgroup generated by the matrices in `text` (one `a,b;c,d` per line).
//
// # Safety
// `ring` live, `text` a valid C string, `out` writable.
enum IflStatus ifl_group_generate(const struct IflRing *ring,
                                  const char *text,
                                  uint64_t cap,
                                  struct IflGroup **out);

// # Safety
// `group` live; `out` writable.
enum IflStatus ifl_group_order(const struct IflGroup *group, uint64_t *out);

// # Safety
// `group` must come from this library or be null.
void ifl_group_free(struct IflGroup *group);

// JSON Pink tower report. Returns `Unverified` (with the report still written) if a check fails.
//
// # Safety
// `group` live; `out` writable.
enum IflStatus ifl_pink_report(const struct IflGroup *group,
                               size_t depth,
                               uint64_t cap,
                               char **out);

// JSON fullness certificate for `j` (`a,b;c,d`), or for an automatically found regular element
// when `j` is null. A report is written on `Ok` and `Unverified`.
//
// # Safety
// `group` live; `j` null or a valid C string; `out` writable.
enum IflStatus ifl_fullness_report(const struct IflGroup *group,
                                   const char *j,
                                   uint64_t cap,
                                   char **out);

// Eta quotient `d:e,d:e,...` expanded to `precision` coefficients.
//
// # Safety
// `spec` a valid C string; `out` writable.
enum IflStatus ifl_qexp_eta(const char *spec, size_t precision, struct IflQExpansion **out);

// q-expansion from CSV text (header `key=value` lines, then `n,value` rows).
//
// # Safety
// `text` a valid C string; `out` writable.
enum IflStatus ifl_qexp_parse_csv(const char *text, struct IflQExpansion **out);

// Highest known coefficient index.
//
// # Safety
// `f` live; `out` writable.
enum IflStatus ifl_qexp_precision(const struct IflQExpansion *f, size_t *out);

// a(n) as text, e.g. `-24` or `2*z4`.
//
// # Safety
// `f` live; `out` writable.
enum IflStatus ifl_qexp_coefficient(const struct IflQExpansion *f, size_t n, char **out);

// Hecke operator T(l) (U(l) when l divides the level). Writes a new handle.
//
// # Safety
// `f` live; `out` writable.
enum IflStatus ifl_qexp_hecke(const struct IflQExpansion *f,
                              uint64_t l,
                              struct IflQExpansion **out);

// CSV serialization.
//
// # Safety
// `f` live; `out` writable.
enum IflStatus ifl_qexp_to_csv(const struct IflQExpansion *f, char **out);

// JSON self-twist report over primitive characters of conductor at most `bound`.
//
// # Safety
// `f` live; `out` writable.
enum IflStatus ifl_twist_detect(const struct IflQExpansion *f,
                                uint64_t bound,
                                size_t nprimes,
                                uint64_t cap,
                                char **out);

// # Safety
// `f` must come from this library or be null.
void ifl_qexp_free(struct IflQExpansion *f);

// Run one built-in acceptance check (1..=11). `Ok` on pass, `Unverified` on failure or skip;
// `detail` (optional) receives the one-line summary.
//
// # Safety
// `detail` null or writable.
enum IflStatus ifl_selftest_criterion(uint32_t id, uint64_t cap, char **detail);

#endif /* IFL_H */
