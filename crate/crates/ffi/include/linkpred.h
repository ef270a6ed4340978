#ifndef LINKPRED_H
#define LINKPRED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Width of one heuristic feature row.
#define LP_HEURISTIC_DIM 56

typedef enum LpStatus {
  LP_STATUS_OK = 0,
  LP_STATUS_NULL_POINTER = 1,
  LP_STATUS_INVALID_ARGUMENT = 2,
  LP_STATUS_PARSE = 3,
  LP_STATUS_IO = 4,
  LP_STATUS_EMPTY_GRAPH = 5,
  LP_STATUS_INVALID_NODE = 6,
  LP_STATUS_DIVERGED = 7,
  LP_STATUS_DIMENSION_MISMATCH = 8,
  LP_STATUS_MODEL = 9,
  LP_STATUS_CONFIG = 10,
  LP_STATUS_ARTIFACT = 11,
  LP_STATUS_BUFFER_TOO_SMALL = 12,
  LP_STATUS_PANIC = 13,
} LpStatus;

// Which side of a split.
typedef enum LpPart {
  LP_PART_TRAIN = 0,
  LP_PART_TEST = 1,
} LpPart;

// Train/test split handle.
typedef struct LpDataset LpDataset;

// Graph handle.
typedef struct LpGraph LpGraph;

// Evaluation metrics at the 0.5 threshold.
typedef struct LpMetrics {
  double precision;
  double recall;
  double f1;
  double accuracy;
  uint64_t tp;
  uint64_t fp;
  uint64_t tn;
  uint64_t fn_;
} LpMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Text of the last error on this thread, or null after a successful call.
// The pointer stays valid until the next `lp_*` call on the same thread.
const char *lp_last_error(void);

// Library version as a static NUL-terminated string.
const char *lp_version(void);

// Build a graph from parallel arrays of raw node ids. Raw ids are
// relabelled densely in order of first appearance.
//
// # Safety
// `src` and `dst` must point to `len` readable values; `out` must be
// writable.
enum LpStatus lp_graph_from_edges(const uint64_t *src,
                                  const uint64_t *dst,
                                  size_t len,
                                  bool directed,
                                  struct LpGraph **out);

// Load a whitespace- or comma-separated edge list.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum LpStatus lp_graph_load(const char *path,
                            bool directed,
                            bool skip_header,
                            struct LpGraph **out);

// # Safety
// `g` must be null or a handle from this library not yet freed.
void lp_graph_free(struct LpGraph *g);

// Node count, or 0 for a null handle.
//
// # Safety
// `g` must be null or a live handle.
size_t lp_graph_node_count(const struct LpGraph *g);

// Edge count (undirected edges counted once), or 0 for a null handle.
//
// # Safety
// `g` must be null or a live handle.
size_t lp_graph_edge_count(const struct LpGraph *g);

// Raw id of dense node `u`.
//
// # Safety
// `g` must be a live handle and `out` writable.
enum LpStatus lp_graph_raw_id(const struct LpGraph *g, size_t u, uint64_t *out);

// Hop distance from `u` to `v` (dense ids), or -1 when unreachable.
//
// # Safety
// `g` must be a live handle and `out` writable.
enum LpStatus lp_graph_distance(const struct LpGraph *g,
                                size_t u,
                                size_t v,
                                bool ignore_direction,
                                int64_t *out);

// Heuristic rows for `len` candidate edges (dense ids) with default
// settings and the given Katz decay. Writes `len * LP_HEURISTIC_DIM`
// values row by row into `out`, which holds `out_len` doubles.
//
// # Safety
// Arrays must hold the stated number of elements; `g` must be live.
enum LpStatus lp_graph_heuristics(const struct LpGraph *g,
                                  const size_t *src,
                                  const size_t *dst,
                                  size_t len,
                                  double katz_alpha,
                                  double *out,
                                  size_t out_len);

// Node-preserving train/test split with distance-3 negatives.
//
// # Safety
// `g` must be live and `out` writable.
enum LpStatus lp_dataset_split(const struct LpGraph *g,
                               double test_fraction,
                               uint64_t seed,
                               struct LpDataset **out);

// # Safety
// `d` must be null or a live handle.
void lp_dataset_free(struct LpDataset *d);

// Number of labelled edges on one side, or 0 for a null handle.
//
// # Safety
// `d` must be null or a live handle.
size_t lp_dataset_len(const struct LpDataset *d, enum LpPart part);

// Copy one side's edges into caller arrays of capacity `cap`.
//
// # Safety
// `src`, `dst` and `labels` must each hold `cap` writable elements.
enum LpStatus lp_dataset_edges(const struct LpDataset *d,
                               enum LpPart part,
                               size_t *src,
                               size_t *dst,
                               uint8_t *labels,
                               size_t cap);

// New graph handle holding only the training positives over the full
// node set.
//
// # Safety
// `d` must be live and `out` writable.
enum LpStatus lp_dataset_train_graph(const struct LpDataset *d, struct LpGraph **out);

// Run every pipeline stage for a config file, writing artifacts under
// `out_dir`. `threads` of 0 keeps the default worker count.
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum LpStatus lp_pipeline_run(const char *config_path,
                              const char *out_dir,
                              size_t threads,
                              bool overwrite,
                              struct LpMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINKPRED_H */
