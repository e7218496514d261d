#include "trignet/flow_gat.hpp"

#include <stdexcept>

namespace trignet {

namespace {

EdgeList reversed(const EdgeList& edges) {
    EdgeList out;
    out.reserve(edges.size());
    for (const auto& [a, b] : edges) out.emplace_back(b, a);
    return out;
}

NodeId mean_of(Tape& tape, NodeId a, NodeId b) {
    return tape.scale(tape.add(a, b), 0.5);
}

}  // namespace

MpParams MpParams::create(ParamStore& store, const std::string& prefix, int d, int heads,
                          uint64_t seed) {
    if (heads <= 0 || d % heads != 0)
        throw std::runtime_error("MpParams: heads must divide d");
    const int dh = d / heads;
    MpParams p;
    for (int k = 0; k < heads; ++k) {
        Head h;
        const std::string base = prefix + ".h" + std::to_string(k) + ".";
        h.Ww = base + "Ww";
        h.Wp = base + "Wp";
        h.Wv = base + "Wv";
        h.zq = base + "zq";
        h.zc = base + "zc";
        store.create_glorot(h.Ww, d, dh, d, dh, seed);
        store.create_glorot(h.Wp, d, dh, d, dh, seed);
        store.create_glorot(h.Wv, d, dh, d, dh, seed);
        // the score vector maps the concatenated 2*dh pair to one scalar
        store.create_glorot(h.zq, dh, 1, 2 * dh, 1, seed);
        store.create_glorot(h.zc, dh, 1, 2 * dh, 1, seed);
        p.heads.push_back(std::move(h));
    }
    return p;
}

MpParams MpParams::reference(const std::string& prefix, int heads) {
    MpParams p;
    for (int k = 0; k < heads; ++k) {
        const std::string base = prefix + ".h" + std::to_string(k) + ".";
        p.heads.push_back(Head{base + "Ww", base + "Wp", base + "Wv", base + "zq", base + "zc"});
    }
    return p;
}

uint64_t MpParams::param_count(int d, int heads) {
    const uint64_t dh = static_cast<uint64_t>(d) / heads;
    return static_cast<uint64_t>(heads) * (3ull * d * dh + 2ull * dh);
}

MpParamNodes place_on_tape(Tape& tape, const ParamStore& store, const MpParams& params) {
    MpParamNodes nodes;
    for (const auto& h : params.heads)
        nodes.heads.push_back(MpParamNodes::Head{
            tape.param(store, h.Ww), tape.param(store, h.Wp), tape.param(store, h.Wv),
            tape.param(store, h.zq), tape.param(store, h.zc)});
    return nodes;
}

MpResult message_pass(Tape& tape, NodeId query, NodeId ctx, const EdgeList& edges,
                      const MpParamNodes& params, int n_heads) {
    // copy the dimensions: recording new nodes may reallocate the tape,
    // so references from tape.value() must not be held across pushes
    const int q_rows = tape.value(query).rows;
    const int c_rows = tape.value(ctx).rows;
    if (tape.value(query).cols != tape.value(ctx).cols)
        throw std::runtime_error("message_pass: query/ctx width mismatch");
    if (static_cast<int>(params.heads.size()) != n_heads)
        throw std::runtime_error("message_pass: head count mismatch");

    std::vector<int> q_idx, c_idx;
    q_idx.reserve(edges.size());
    c_idx.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= q_rows || b < 0 || b >= c_rows)
            throw std::runtime_error("message_pass: edge index out of range");
        q_idx.push_back(a);
        c_idx.push_back(b);
    }

    MpResult res;
    res.beta_segments = q_idx;
    std::vector<NodeId> head_outs;
    head_outs.reserve(n_heads);
    for (int k = 0; k < n_heads; ++k) {
        const auto& h = params.heads[k];
        NodeId q_proj = tape.matmul(query, h.Ww);  // A x dh
        NodeId k_proj = tape.matmul(ctx, h.Wp);    // B x dh
        NodeId v_proj = tape.matmul(ctx, h.Wv);    // B x dh
        NodeId s_q = tape.matmul(q_proj, h.zq);    // A x 1
        NodeId s_c = tape.matmul(k_proj, h.zc);    // B x 1

        NodeId scores = tape.leaky_relu(
            tape.add(tape.gather_rows(s_q, q_idx), tape.gather_rows(s_c, c_idx)),
            kAttnLeakySlope);                                              // E x 1
        NodeId beta = tape.segment_softmax(scores, q_idx, q_rows);         // E x 1
        NodeId weighted = tape.mul_col_broadcast(tape.gather_rows(v_proj, c_idx), beta);
        NodeId agg = tape.scatter_add_rows(weighted, q_idx, q_rows);       // A x dh
        head_outs.push_back(tape.tanh(agg));
        res.beta.push_back(beta);
    }
    res.out = tape.add(query, tape.concat_cols(head_outs));  // residual
    return res;
}

FgatParams FgatParams::create(ParamStore& store, const std::string& prefix, int d, int heads,
                              uint64_t seed, bool tied) {
    FgatParams p;
    p.tied = tied;
    if (tied) {
        p.w_from_p = MpParams::create(store, prefix + ".shared", d, heads, seed);
        p.p_from_w = MpParams::reference(prefix + ".shared", heads);
        p.c_from_w = p.p_from_w;
        p.w_from_c = p.p_from_w;
        p.p_from_w_via_c = p.p_from_w;
        return p;
    }
    p.w_from_p = MpParams::create(store, prefix + ".w_from_p", d, heads, seed);
    p.p_from_w = MpParams::create(store, prefix + ".p_from_w", d, heads, seed);
    p.c_from_w = MpParams::create(store, prefix + ".c_from_w", d, heads, seed);
    p.w_from_c = MpParams::create(store, prefix + ".w_from_c", d, heads, seed);
    p.p_from_w_via_c = MpParams::create(store, prefix + ".p_from_w_via_c", d, heads, seed);
    return p;
}

FgatParams FgatParams::reference(const std::string& prefix, int heads, bool tied) {
    FgatParams p;
    p.tied = tied;
    if (tied) {
        p.w_from_p = MpParams::reference(prefix + ".shared", heads);
        p.p_from_w = p.w_from_p;
        p.c_from_w = p.w_from_p;
        p.w_from_c = p.w_from_p;
        p.p_from_w_via_c = p.w_from_p;
        return p;
    }
    p.w_from_p = MpParams::reference(prefix + ".w_from_p", heads);
    p.p_from_w = MpParams::reference(prefix + ".p_from_w", heads);
    p.c_from_w = MpParams::reference(prefix + ".c_from_w", heads);
    p.w_from_c = MpParams::reference(prefix + ".w_from_c", heads);
    p.p_from_w_via_c = MpParams::reference(prefix + ".p_from_w_via_c", heads);
    return p;
}

FgatParamNodes place_on_tape(Tape& tape, const ParamStore& store, const FgatParams& params) {
    FgatParamNodes nodes;
    nodes.w_from_p = place_on_tape(tape, store, params.w_from_p);
    if (params.tied) {
        nodes.p_from_w = nodes.w_from_p;
        nodes.c_from_w = nodes.w_from_p;
        nodes.w_from_c = nodes.w_from_p;
        nodes.p_from_w_via_c = nodes.w_from_p;
        return nodes;
    }
    nodes.p_from_w = place_on_tape(tape, store, params.p_from_w);
    nodes.c_from_w = place_on_tape(tape, store, params.c_from_w);
    nodes.w_from_c = place_on_tape(tape, store, params.w_from_c);
    nodes.p_from_w_via_c = place_on_tape(tape, store, params.p_from_w_via_c);
    return nodes;
}

NodeStates fgat_layer(Tape& tape, const NodeStates& states, const TripartiteGraph& g,
                      const FgatParamNodes& params, int n_heads, FlowMode flows) {
    const Mat& Hp = tape.value(states.posts);
    const Mat& Hw = tape.value(states.words);
    const Mat& Hc = tape.value(states.cats);
    if (Hp.rows != g.r() || Hw.rows != g.m() || Hc.rows != g.n())
        throw std::runtime_error("fgat_layer: state dimensions do not match graph sizes");
    if (Hp.cols != Hw.cols || Hp.cols != Hc.cols)
        throw std::runtime_error("fgat_layer: state width mismatch");

    if (flows == FlowMode::None) return states;

    const EdgeList& wp = g.wp_edges;           // (word, post)
    const EdgeList pw = reversed(g.wp_edges);  // (post, word)
    const EdgeList& wc = g.wc_edges;           // (word, cat)
    const EdgeList cw = reversed(g.wc_edges);  // (cat, word)

    // shared first hop: words gather from their posts
    NodeId w_hat = message_pass(tape, states.words, states.posts, wp, params.w_from_p, n_heads).out;

    NodeStates out;
    if (flows == FlowMode::Flow1Only) {
        out.posts = message_pass(tape, states.posts, w_hat, pw, params.p_from_w, n_heads).out;
        out.words = w_hat;
        out.cats = states.cats;
        return out;
    }

    // flow 2: route the word update through the categories and back
    NodeId c_new = message_pass(tape, states.cats, w_hat, cw, params.c_from_w, n_heads).out;
    NodeId w_deep = message_pass(tape, w_hat, c_new, wc, params.w_from_c, n_heads).out;
    NodeId p_deep = message_pass(tape, states.posts, w_deep, pw, params.p_from_w_via_c, n_heads).out;

    if (flows == FlowMode::Flow2Only) {
        out.posts = p_deep;
        out.words = mean_of(tape, w_hat, w_deep);
        out.cats = c_new;
        return out;
    }

    NodeId p_direct = message_pass(tape, states.posts, w_hat, pw, params.p_from_w, n_heads).out;
    out.posts = mean_of(tape, p_direct, p_deep);
    out.words = mean_of(tape, w_hat, w_deep);
    out.cats = c_new;
    return out;
}

EdgeList vanilla_adjacency(const TripartiteGraph& g) {
    const int r = g.r();
    const int m = g.m();
    EdgeList adj;
    adj.reserve(2 * (g.wp_edges.size() + g.wc_edges.size()));
    for (const auto& [w, p] : g.wp_edges) {
        adj.emplace_back(r + w, p);
        adj.emplace_back(p, r + w);
    }
    for (const auto& [w, c] : g.wc_edges) {
        adj.emplace_back(r + w, r + m + c);
        adj.emplace_back(r + m + c, r + w);
    }
    return adj;
}

NodeId vanilla_gat_layer(Tape& tape, NodeId states, const EdgeList& adjacency,
                         const MpParamNodes& params, int n_heads) {
    return message_pass(tape, states, states, adjacency, params, n_heads).out;
}

}  // namespace trignet
