#include <stdio.h>
#include <string.h>

#include "linkpred.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        LpStatus s_ = (call);                                              \
        if (s_ != LP_STATUS_OK) {                                          \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,              \
                    lp_last_error() ? lp_last_error() : "(none)");         \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    /* two 4-cycles joined by a chord */
    uint64_t src[] = {10, 11, 12, 13, 20, 21, 22, 23, 10};
    uint64_t dst[] = {11, 12, 13, 10, 21, 22, 23, 20, 20};
    LpGraph *g = NULL;
    CHECK(lp_graph_from_edges(src, dst, 9, false, &g));
    if (lp_graph_node_count(g) != 8 || lp_graph_edge_count(g) != 9) {
        fprintf(stderr, "counts %zu %zu\n", lp_graph_node_count(g), lp_graph_edge_count(g));
        return 1;
    }

    int64_t d = 0;
    CHECK(lp_graph_distance(g, 1, 6, false, &d));
    printf("distance=%lld\n", (long long)d);

    size_t u[] = {0, 2};
    size_t v[] = {1, 5};
    double rows[2 * LP_HEURISTIC_DIM];
    CHECK(lp_graph_heuristics(g, u, v, 2, 0.05, rows, 2 * LP_HEURISTIC_DIM));

    if (lp_graph_heuristics(g, u, v, 2, 0.05, rows, 3) != LP_STATUS_BUFFER_TOO_SMALL || lp_last_error() == NULL) {
        fprintf(stderr, "expected a buffer error\n");
        return 1;
    }

    LpDataset *ds = NULL;
    CHECK(lp_dataset_split(g, 0.2, 7, &ds));
    size_t n = lp_dataset_len(ds, LP_PART_TRAIN);
    size_t a[64], b[64];
    uint8_t labels[64];
    CHECK(lp_dataset_edges(ds, LP_PART_TRAIN, a, b, labels, 64));
    printf("train=%zu test=%zu\n", n, lp_dataset_len(ds, LP_PART_TEST));

    lp_dataset_free(ds);
    lp_graph_free(g);
    lp_graph_free(NULL);
    printf("version=%s\n", lp_version());
    return 0;
}
