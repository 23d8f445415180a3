#ifndef GRAPHEX_H
#define GRAPHEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GxStatus {
  GX_STATUS_OK = 0,
  GX_STATUS_NULL_POINTER = 1,
  GX_STATUS_INVALID_ARGUMENT = 2,
  GX_STATUS_PARSE = 3,
  GX_STATUS_ODD_HALF_EDGE_SUM = 4,
  GX_STATUS_UNBALANCED_SIDES = 5,
  GX_STATUS_TOO_LARGE = 6,
  GX_STATUS_RATE_EXCEEDS_ONE = 7,
  GX_STATUS_NO_EDGES = 8,
  GX_STATUS_COLLISION_RETRY = 9,
  GX_STATUS_VALIDATION_FAILURE = 10,
  GX_STATUS_TRUNCATION_BUDGET_EXCEEDED = 11,
  GX_STATUS_IO = 12,
  GX_STATUS_PANIC = 13,
} GxStatus;

typedef struct GxCensus GxCensus;

typedef struct GxGraphex GxGraphex;

typedef struct GxMeasure GxMeasure;

typedef struct GxMultigraph GxMultigraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next call on the same thread.
const char *gx_last_error(void);

// Library version as a static NUL-terminated string.
const char *gx_version(void);

// # Safety
// `s` must come from a `gx_*` function returning `char *`, or be NULL.
void gx_string_free(char *s);

// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum GxStatus gx_multigraph_from_json(const char *json, struct GxMultigraph **out);

// Configuration model on `degrees[0..n]`.
//
// # Safety
// `degrees` must point to `n` readable values and `out` be writable.
enum GxStatus gx_multigraph_configuration_model(const uint32_t *degrees,
                                                size_t n,
                                                uint64_t seed,
                                                uint64_t replicate,
                                                struct GxMultigraph **out);

// Canonical sample of `g` at size `t`.
//
// # Safety
// `g` must be a live handle and `out` writable.
enum GxStatus gx_multigraph_canonical_sample(const struct GxMultigraph *g,
                                             double t,
                                             uint64_t seed,
                                             uint64_t replicate,
                                             struct GxMultigraph **out);

// # Safety
// `g` must be a live handle or NULL.
size_t gx_multigraph_vertex_count(const struct GxMultigraph *g);

// Non-loop edges counted with multiplicity.
//
// # Safety
// `g` must be a live handle or NULL.
uint64_t gx_multigraph_edge_count(const struct GxMultigraph *g);

// # Safety
// `g` must be a live handle or NULL.
uint64_t gx_multigraph_loop_count(const struct GxMultigraph *g);

// Writes the degree of every vertex into `buf`, which holds `len` values.
//
// # Safety
// `g` must be a live handle and `buf` writable for `len` values.
enum GxStatus gx_multigraph_degrees(const struct GxMultigraph *g, uint64_t *buf, size_t len);

// Serializes `g`; free the result with `gx_string_free`.
//
// # Safety
// `g` must be a live handle and `out` writable.
enum GxStatus gx_multigraph_to_json(const struct GxMultigraph *g, char **out);

// # Safety
// `g` must be a handle from this library or NULL; it is invalid afterwards.
void gx_multigraph_free(struct GxMultigraph *g);

// Empirical degree measure of `degrees[0..n]`: mass `1/√ℓ` at each `d_i/√ℓ`.
//
// # Safety
// `degrees` must point to `n` readable values and `out` be writable.
enum GxStatus gx_measure_from_degrees(const uint32_t *degrees, size_t n, struct GxMeasure **out);

// Measure with atoms at `locations[i]` carrying `masses[i]`.
//
// # Safety
// Both arrays must hold `n` readable values and `out` be writable.
enum GxStatus gx_measure_from_atoms(const double *locations,
                                    const double *masses,
                                    size_t n,
                                    struct GxMeasure **out);

// # Safety
// `m` must be a live handle or NULL.
double gx_measure_total_mass(const struct GxMeasure *m);

// # Safety
// `m` must be a live handle or NULL.
double gx_measure_first_moment(const struct GxMeasure *m);

// Mass of `(x, ∞)`.
//
// # Safety
// `m` must be a live handle or NULL.
double gx_measure_tail(const struct GxMeasure *m, double x);

// # Safety
// `m` must be a handle from this library or NULL; it is invalid afterwards.
void gx_measure_free(struct GxMeasure *m);

// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum GxStatus gx_graphex_from_json(const char *json, struct GxGraphex **out);

// Limiting multigraphex of the configuration model on `degrees[0..n]`,
// with vertices of degree above `tau·√ℓ` treated as hubs.
//
// # Safety
// `degrees` must point to `n` readable values and `out` be writable.
enum GxStatus gx_graphex_limit_of_cm(const uint32_t *degrees,
                                     size_t n,
                                     double tau,
                                     struct GxGraphex **out);

// Checks the integrability conditions. `*passed` is set to 1 or 0; the
// full report goes to `*report_json` when that is not NULL.
//
// # Safety
// `w` must be a live handle, `passed` writable, `report_json` writable or NULL.
enum GxStatus gx_graphex_validate(const struct GxGraphex *w,
                                  size_t resolution,
                                  int32_t *passed,
                                  char **report_json);

// Draws the graph process of `w` at size `t`.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum GxStatus gx_graphex_sample(const struct GxGraphex *w,
                                double t,
                                uint64_t seed,
                                uint64_t replicate,
                                struct GxMultigraph **out);

// # Safety
// `w` must be a live handle and `out` writable.
enum GxStatus gx_graphex_to_json(const struct GxGraphex *w, char **out);

// # Safety
// `w` must be a handle from this library or NULL; it is invalid afterwards.
void gx_graphex_free(struct GxGraphex *w);

// Empty census; graphs with more than `vertex_limit` vertices after
// dropping isolated ones are counted in a single oversize class.
struct GxCensus *gx_census_new(size_t vertex_limit);

// # Safety
// `c` and `g` must be live handles.
enum GxStatus gx_census_add(struct GxCensus *c, const struct GxMultigraph *g);

// # Safety
// `c` must be a live handle or NULL.
uint64_t gx_census_total(const struct GxCensus *c);

// # Safety
// `c` must be a live handle or NULL.
size_t gx_census_class_count(const struct GxCensus *c);

// Total variation distance between the empirical laws of two censuses.
//
// # Safety
// `a` and `b` must be live handles and `out` writable.
enum GxStatus gx_census_tv(const struct GxCensus *a, const struct GxCensus *b, double *out);

// # Safety
// `c` must be a live handle and `out` writable.
enum GxStatus gx_census_to_json(const struct GxCensus *c, char **out);

// # Safety
// `c` must be a handle from this library or NULL; it is invalid afterwards.
void gx_census_free(struct GxCensus *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHEX_H */
