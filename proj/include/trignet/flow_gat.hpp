#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trignet/config.hpp"
#include "trignet/graph.hpp"
#include "trignet/param_store.hpp"
#include "trignet/tape.hpp"

namespace trignet {

/// LeakyReLU slope inside attention scores (original GAT convention).
constexpr double kAttnLeakySlope = 0.2;

using EdgeList = std::vector<std::pair<int, int>>;  // (query_idx, ctx_idx)

/// Per-head projections of one message-passing site. Stored layouts:
///   Ww, Wp, Wv: d x head_dim (right-multiplication projections of the
///   query, key and value states), zq, zc: head_dim x 1 (the two halves
///   of the per-edge score vector, applied to query and context sides).
struct MpParams {
    struct Head {
        std::string Ww, Wp, Wv, zq, zc;  // parameter names
    };
    std::vector<Head> heads;

    /// Registers Glorot-initialized parameters ("<prefix>.h<k>.<role>").
    static MpParams create(ParamStore& store, const std::string& prefix, int d, int heads,
                           uint64_t seed);
    /// References existing parameters with the same naming scheme.
    static MpParams reference(const std::string& prefix, int heads);

    /// Learnable scalar count for one site: heads * (3 d head_dim + 2 head_dim).
    static uint64_t param_count(int d, int heads);
};

/// Tape node ids of one MP site's parameters.
struct MpParamNodes {
    struct Head {
        NodeId Ww, Wp, Wv, zq, zc;
    };
    std::vector<Head> heads;
};

MpParamNodes place_on_tape(Tape& tape, const ParamStore& store, const MpParams& params);

struct MpResult {
    NodeId out;                      // A x d updated query states
    std::vector<NodeId> beta;        // per head: E x 1 attention weights
    std::vector<int> beta_segments;  // query index per edge (shared across heads)
};

/// One attention message pass: for each query row with neighbors, score
/// each edge with LeakyReLU(zq . Ww h_q + zc . Wp h_c), normalize per
/// query with a softmax, aggregate tanh(sum beta Wv h_c) per head,
/// concatenate heads, and add the query residual. Queries without
/// neighbors pass through unchanged (zero message + residual).
MpResult message_pass(Tape& tape, NodeId query, NodeId ctx, const EdgeList& edges,
                      const MpParamNodes& params, int n_heads);

/// Hidden states of the three parties.
struct NodeStates {
    NodeId posts, words, cats;
};

/// The five MP sites of one flow layer, in schedule order.
struct FgatParams {
    MpParams w_from_p;        // words attend over their posts
    MpParams p_from_w;        // posts attend over updated words (flow 1)
    MpParams c_from_w;        // categories attend over updated words
    MpParams w_from_c;        // updated words attend over categories
    MpParams p_from_w_via_c;  // posts attend over category-refreshed words (flow 2)
    bool tied = false;

    /// Registers all five sites ("<prefix>.<site>..."), or a single
    /// shared site ("<prefix>.shared...") referenced five times when
    /// tied.
    static FgatParams create(ParamStore& store, const std::string& prefix, int d, int heads,
                             uint64_t seed, bool tied);
    /// Name references only (e.g. over a store loaded from a checkpoint).
    static FgatParams reference(const std::string& prefix, int heads, bool tied);
};

struct FgatParamNodes {
    MpParamNodes w_from_p, p_from_w, c_from_w, w_from_c, p_from_w_via_c;
};

/// Tied parameter sets are placed once and referenced five times.
FgatParamNodes place_on_tape(Tape& tape, const ParamStore& store, const FgatParams& params);

/// One flow GAT layer over the tripartite graph. Both flows start from
/// the shared word update; flow 1 sends it straight back to the posts,
/// flow 2 routes it through the category nodes and back. Party outputs
/// average the flow results that are enabled; with both flows off the
/// layer is the identity.
NodeStates fgat_layer(Tape& tape, const NodeStates& states, const TripartiteGraph& g,
                      const FgatParamNodes& params, int n_heads, FlowMode flows);

/// Flattened node order for the homogeneous baseline: posts, then words,
/// then categories.
EdgeList vanilla_adjacency(const TripartiteGraph& g);

/// Single homogeneous GAT update over all nodes at once; `adjacency`
/// must contain both directions of every edge. Stacked by the caller.
NodeId vanilla_gat_layer(Tape& tape, NodeId states, const EdgeList& adjacency,
                         const MpParamNodes& params, int n_heads);

}  // namespace trignet
