#ifndef COLORANK_H
#define COLORANK_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ColorankStatus {
  COLORANK_STATUS_OK = 0,
  COLORANK_STATUS_NULL_ARGUMENT = 1,
  COLORANK_STATUS_INVALID_UTF8 = 2,
  COLORANK_STATUS_PARSE = 3,
  COLORANK_STATUS_PRECONDITION = 4,
  COLORANK_STATUS_BUDGET = 5,
  COLORANK_STATUS_BOUNDS = 6,
  COLORANK_STATUS_NOT_FOUND = 7,
  COLORANK_STATUS_INTERNAL = 8,
  COLORANK_STATUS_IO = 9,
  COLORANK_STATUS_PANIC = 10,
} ColorankStatus;

/**
 * A parsed finite model.
 */
typedef struct ColorankModel ColorankModel;

/**
 * A realized scene of rational points.
 */
typedef struct ColorankScene ColorankScene;

/**
 * A parsed coloring tree.
 */
typedef struct ColorankTree ColorankTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *colorank_last_error(void);

/**
 * Library version as a static string.
 */
const char *colorank_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void colorank_string_free(char *s);

/**
 * Parses a tree file; on success `*out` owns a new handle.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` valid for writes.
 */
enum ColorankStatus colorank_tree_parse(const char *src, struct ColorankTree **out);

/**
 * # Safety
 * `t` must be null or a handle from [`colorank_tree_parse`], not yet freed.
 */
void colorank_tree_free(struct ColorankTree *t);

/**
 * Number of extension violations in the tree.
 *
 * # Safety
 * `t` must be a live handle and `violations` valid for writes.
 */
enum ColorankStatus colorank_tree_validate(const struct ColorankTree *t, size_t *violations);

/**
 * Tree rank of the truncation: one more than the largest approximation value.
 *
 * # Safety
 * `t` must be a live handle and `rank` valid for writes.
 */
enum ColorankStatus colorank_tree_rank(const struct ColorankTree *t,
                                       size_t cap,
                                       size_t budget,
                                       uint32_t *rank);

/**
 * Full rank listing in the text format; free with [`colorank_string_free`].
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum ColorankStatus colorank_tree_rank_listing(const struct ColorankTree *t,
                                               size_t cap,
                                               size_t budget,
                                               char **out);

/**
 * # Safety
 * `src` must be a NUL-terminated string and `out` valid for writes.
 */
enum ColorankStatus colorank_model_parse(const char *src, struct ColorankModel **out);

/**
 * # Safety
 * `m` must be null or a handle from [`colorank_model_parse`], not yet freed.
 */
void colorank_model_free(struct ColorankModel *m);

/**
 * θ-rank of the whole model.
 *
 * # Safety
 * `m` must be a live handle and `rank` valid for writes.
 */
enum ColorankStatus colorank_model_rank(const struct ColorankModel *m,
                                        size_t theta,
                                        uint32_t *rank);

/**
 * Oracle dump of ranks, critical elements and types; free with
 * [`colorank_string_free`].
 *
 * # Safety
 * `m` must be a live handle and `out` valid for writes.
 */
enum ColorankStatus colorank_model_oracle(const struct ColorankModel *m, size_t theta, char **out);

/**
 * Realizes a coloring file with at most `max_classes` classes.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` valid for writes.
 */
enum ColorankStatus colorank_scene_realize(const char *src,
                                           size_t max_classes,
                                           struct ColorankScene **out);

/**
 * # Safety
 * `s` must be null or a handle from [`colorank_scene_realize`], not yet freed.
 */
void colorank_scene_free(struct ColorankScene *s);

/**
 * Number of subsets whose defect disagrees with the coloring.
 *
 * # Safety
 * `s` must be a live handle and `mismatches` valid for writes.
 */
enum ColorankStatus colorank_scene_sweep(const struct ColorankScene *s,
                                         size_t budget,
                                         size_t *mismatches);

/**
 * Scene dump in the text format; free with [`colorank_string_free`].
 *
 * # Safety
 * `s` must be a live handle and `out` valid for writes.
 */
enum ColorankStatus colorank_scene_dump(const struct ColorankScene *s, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLORANK_H */
