#ifndef ADDLAB_H
#define ADDLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum AddlabStatus {
  ADDLAB_STATUS_OK = 0,
  ADDLAB_STATUS_NULL_POINTER = 1,
  // Malformed input: bad group, element, argument or document.
  ADDLAB_STATUS_INVALID_INPUT = 2,
  // A size cap was exceeded.
  ADDLAB_STATUS_CAP_EXCEEDED = 3,
  // A precondition of the algorithm does not hold.
  ADDLAB_STATUS_PRECONDITION = 4,
  // Internal inconsistency or a caught panic.
  ADDLAB_STATUS_INTERNAL = 5,
} AddlabStatus;

// A finite abelian group.
typedef struct AddlabGroup AddlabGroup;

// A subset of a group.
typedef struct AddlabSet AddlabSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next call.
const char *addlab_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *addlab_version(void);

// # Safety
// `factors` points to `len` readable values; `out` is writable.
enum AddlabStatus addlab_group_new(const uintptr_t *factors,
                                   uintptr_t len,
                                   struct AddlabGroup **out_group);

// # Safety
// `group` is null or a live handle from [`addlab_group_new`].
void addlab_group_free(struct AddlabGroup *group);

// # Safety
// `group` is a live handle; `order` is writable.
enum AddlabStatus addlab_group_order(const struct AddlabGroup *group, uintptr_t *order);

// Builds a set from element ranks (mixed-radix, last coordinate fastest).
//
// # Safety
// `group` is a live handle, `ranks` points to `len` values, `out_set` is writable.
enum AddlabStatus addlab_set_from_ranks(const struct AddlabGroup *group,
                                        const uintptr_t *ranks,
                                        uintptr_t len,
                                        struct AddlabSet **out_set);

// Parses a set document (`{"group": [...], "elements": [[...], ...]}`).
//
// # Safety
// `json` is a NUL-terminated string; `out_set` is writable.
enum AddlabStatus addlab_set_from_json(const char *json, struct AddlabSet **out_set);

// Emits the set as a set document; free the string with [`addlab_string_free`].
//
// # Safety
// `set` is a live handle; `out_json` is writable.
enum AddlabStatus addlab_set_to_json(const struct AddlabSet *set, char **out_json);

// # Safety
// `set` is null or a live handle.
void addlab_set_free(struct AddlabSet *set);

// # Safety
// `s` is null or a string returned by this library.
void addlab_string_free(char *s);

// # Safety
// `set` is a live handle; `len` is writable.
enum AddlabStatus addlab_set_len(const struct AddlabSet *set, uintptr_t *len);

// Copies up to `cap` element ranks into `ranks` and stores the set size in `len`.
//
// # Safety
// `ranks` has room for `cap` values (may be null when `cap` is 0).
enum AddlabStatus addlab_set_ranks(const struct AddlabSet *set,
                                   uintptr_t *ranks,
                                   uintptr_t cap,
                                   uintptr_t *len);

// `E(A, B)`.
//
// # Safety
// `a`, `b` are live handles; `value` is writable.
enum AddlabStatus addlab_energy(const struct AddlabSet *a,
                                const struct AddlabSet *b,
                                uint64_t *value);

// `T_k(A)`.
//
// # Safety
// `a` is a live handle; `value` is writable.
enum AddlabStatus addlab_t_energy(const struct AddlabSet *a, uintptr_t k, uint64_t *value);

// # Safety
// `a` is a live handle; `result` is writable.
enum AddlabStatus addlab_is_dissociated(const struct AddlabSet *a, bool *result);

// `dim(A)`; `exact` is false when `|A|` exceeds `exact_cap` or the search budget ran out.
//
// # Safety
// `a` is a live handle; `value` and `exact` are writable.
enum AddlabStatus addlab_dimension(const struct AddlabSet *a,
                                   uintptr_t exact_cap,
                                   uintptr_t *value,
                                   bool *exact);

// Runs the energy extractor on `(A, B)`, storing `B_*` and whether
// `E(A, B_*) >= E(A, B) / 4` was confirmed by recount.
//
// # Safety
// `a`, `b` are live handles; `out_set` and `postcondition` are writable.
enum AddlabStatus addlab_extract_energy_subset(const struct AddlabSet *a,
                                               const struct AddlabSet *b,
                                               double epsilon,
                                               struct AddlabSet **out_set,
                                               bool *postcondition);

// Full analysis report as JSON, with the default run configuration.
//
// # Safety
// `a` is a live handle; `out_json` is writable.
enum AddlabStatus addlab_analyze_json(const struct AddlabSet *a, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADDLAB_H */
