#ifndef PEDAL_H
#define PEDAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PedalEquivKind {
  PEDAL_EQUIV_KIND_STRONG = 0,
  PEDAL_EQUIV_KIND_BRANCHING = 1,
} PedalEquivKind;

typedef enum PedalMode {
  PEDAL_MODE_REFERENCE = 0,
  PEDAL_MODE_TAU = 1,
  PEDAL_MODE_COMPILED = 2,
} PedalMode;

typedef enum PedalStatus {
  PEDAL_STATUS_OK = 0,
  PEDAL_STATUS_NULL_ARGUMENT = 1,
  PEDAL_STATUS_INVALID_UTF8 = 2,
  PEDAL_STATUS_SYNTAX_ERROR = 3,
  PEDAL_STATUS_VALIDATION_ERROR = 4,
  PEDAL_STATUS_STATE_LIMIT = 5,
  PEDAL_STATUS_FORMULA_ERROR = 6,
  PEDAL_STATUS_UNKNOWN_ACTION = 7,
  PEDAL_STATUS_AUT_ERROR = 8,
  PEDAL_STATUS_INVALID_ARGUMENT = 9,
  PEDAL_STATUS_PANIC = 10,
} PedalStatus;

/**
 * A labeled transition system.
 */
typedef struct PedalLts PedalLts;

/**
 * A parsed and validated model.
 */
typedef struct PedalModel PedalModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *pedal_last_error(void);

/**
 * Parses and validates model source text.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
enum PedalStatus pedal_model_load(const char *source, struct PedalModel **out);

/**
 * # Safety
 * `model` must come from [`pedal_model_load`] and not be used afterwards.
 */
void pedal_model_free(struct PedalModel *model);

/**
 * Number of declared input actions.
 *
 * # Safety
 * `model` must be a live handle or NULL (which yields 0).
 */
size_t pedal_model_num_actions(const struct PedalModel *model);

/**
 * Builds the LTS of a model; `mode` is a [`PedalMode`] value.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum PedalStatus pedal_lts_build(const struct PedalModel *model,
                                 uint32_t mode,
                                 struct PedalLts **out);

/**
 * Parses Aldebaran text.
 *
 * # Safety
 * `aut` must be a NUL-terminated string; `out` must be writable.
 */
enum PedalStatus pedal_lts_from_aut(const char *aut, struct PedalLts **out);

/**
 * # Safety
 * `lts` must be a live handle or NULL (which yields 0).
 */
size_t pedal_lts_num_states(const struct PedalLts *lts);

/**
 * # Safety
 * `lts` must be a live handle or NULL (which yields 0).
 */
size_t pedal_lts_num_transitions(const struct PedalLts *lts);

/**
 * Canonical Aldebaran text; release it with [`pedal_string_free`].
 *
 * # Safety
 * `lts` must be a live handle; `out` must be writable.
 */
enum PedalStatus pedal_lts_to_aut(const struct PedalLts *lts, char **out);

/**
 * # Safety
 * `lts` must come from this library and not be used afterwards.
 */
void pedal_lts_free(struct PedalLts *lts);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void pedal_string_free(char *s);

/**
 * Decides bisimilarity of two LTSs; `kind` is a [`PedalEquivKind`] value.
 *
 * # Safety
 * `a` and `b` must be live handles; `equivalent` must be writable.
 */
enum PedalStatus pedal_equivalent(const struct PedalLts *a,
                                  const struct PedalLts *b,
                                  uint32_t kind,
                                  bool *equivalent);

/**
 * Checks a property file (optional `bind` lines, then one formula).
 *
 * # Safety
 * `lts` must be a live handle, `property` a NUL-terminated string and
 * `holds` writable.
 */
enum PedalStatus pedal_check(const struct PedalLts *lts, const char *property, bool *holds);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PEDAL_H */
