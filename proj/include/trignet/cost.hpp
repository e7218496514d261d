#pragma once

#include <cstdint>
#include <string>

namespace trignet {

/// Node/edge counts of one tripartite graph plus the model width.
struct GraphShape {
    long r = 0;     // post nodes
    long m = 0;     // word nodes
    long n = 0;     // category nodes
    long e_wp = 0;  // word-post edges
    long e_wc = 0;  // word-category edges
    int d = 0;      // state width
    int heads = 0;  // attention heads K

    long nodes() const { return r + m + n; }
};

/// Analytic cost of one message pass with A query rows, B context rows
/// and E edges. The count mirrors the tape primitives exactly (see the
/// FLOP convention in tape.hpp):
///   projections   2*A*d*dh + 2*(2*B*d*dh)   per head (query, key, value)
///   score vectors 2*A*dh + 2*B*dh           per head
///   edge scores   E (add) + E (leaky_relu)  per head
///   softmax       10*E                      per head
///   aggregation   E*dh (weight) + E*dh (scatter) per head
///   tanh          8*A*dh                    per head
///   residual      A*d                       once (concat is free)
uint64_t count_mp(long A, long B, long E, int d, int heads);

/// Forward activation values (not bytes) retained by one message pass,
/// parameters and layer inputs excluded. The forward pass keeps every
/// intermediate alive for the backward pass, so "peak" is the sum of
/// all activations produced.
uint64_t mp_activation_values(long A, long B, long E, int d, int heads);

/// One flow layer, both flows enabled: the five MP sites of the
/// schedule plus the two party means.
uint64_t flow_layer_flops(const GraphShape& s);
uint64_t flow_layer_activation_values(const GraphShape& s);

/// One homogeneous baseline layer: every node attends over the full
/// bidirectional edge set (2*(e_wp + e_wc) directed edges).
uint64_t vanilla_layer_flops(const GraphShape& s);
uint64_t vanilla_layer_activation_values(const GraphShape& s);

struct CostReport {
    std::string variant;       // "flow" or "vanilla"
    int layers = 0;
    uint64_t flops = 0;
    uint64_t peak_mem_bytes = 0;   // forward activations incl. inputs, 8 bytes/value
    uint64_t train_mem_bytes = 0;  // activations + matching gradient buffers
    uint64_t param_count = 0;
};

struct CostComparison {
    CostReport flow;
    CostReport vanilla;
    double flop_reduction = 0.0;  // 1 - flow/vanilla
    double mem_reduction = 0.0;
};

/// Closed-form comparison of flow GAT (l_flow layers) against the
/// stacked homogeneous baseline (l_vanilla layers) on one graph shape.
CostComparison compare_costs(const GraphShape& s, int l_flow, int l_vanilla,
                             bool tie_mp_params = false);

/// The default profile shape: r posts at `words_per_post`
/// distinct dictionary words each, n categories, m = max_nodes - r - n
/// word nodes, one category edge per word.
GraphShape reference_profile_shape(long r, long n, long max_nodes, double words_per_post, int d,
                             int heads);

}  // namespace trignet
