#include "trignet/cost.hpp"

#include <cmath>
#include <stdexcept>

#include "trignet/flow_gat.hpp"
#include "trignet/tape.hpp"

namespace trignet {

namespace {
void check_shape(const GraphShape& s) {
    if (s.r < 0 || s.m < 0 || s.n < 0 || s.e_wp < 0 || s.e_wc < 0)
        throw std::runtime_error("cost: negative counts");
    if (s.d <= 0 || s.heads <= 0 || s.d % s.heads != 0)
        throw std::runtime_error("cost: heads must divide d");
}
}  // namespace

uint64_t count_mp(long A, long B, long E, int d, int heads) {
    const uint64_t dh = static_cast<uint64_t>(d) / heads;
    const uint64_t a = A, b = B, e = E, D = d, K = heads;
    uint64_t per_head = 2 * a * D * dh          // query projection
                        + 2 * (2 * b * D * dh)  // key and value projections
                        + 2 * a * dh + 2 * b * dh  // score vector dots
                        + e + e                    // per-edge add + leaky_relu
                        + flops::kSoftmaxEntry * e // per-edge softmax
                        + e * dh + e * dh          // weighting + scatter accumulation
                        + flops::kTanh * a * dh;   // head activation
    return K * per_head + a * D;  // + residual add
}

uint64_t mp_activation_values(long A, long B, long E, int d, int heads) {
    const uint64_t dh = static_cast<uint64_t>(d) / heads;
    const uint64_t a = A, b = B, e = E, D = d, K = heads;
    // per head: q/k/v projections, two score columns, two gathered score
    // columns, edge sum, leaky, beta, gathered values, weighted values,
    // scatter output, tanh output
    uint64_t per_head = a * dh + 2 * b * dh + a + b + 5 * e + 2 * e * dh + 2 * a * dh;
    return K * per_head + 2 * a * D;  // + concat + residual output
}

uint64_t flow_layer_flops(const GraphShape& s) {
    check_shape(s);
    return count_mp(s.m, s.r, s.e_wp, s.d, s.heads)      // words from posts
           + count_mp(s.r, s.m, s.e_wp, s.d, s.heads)    // posts from words (flow 1)
           + count_mp(s.n, s.m, s.e_wc, s.d, s.heads)    // categories from words
           + count_mp(s.m, s.n, s.e_wc, s.d, s.heads)    // words from categories
           + count_mp(s.r, s.m, s.e_wp, s.d, s.heads)    // posts from deep words (flow 2)
           + 2ull * s.r * s.d + 2ull * s.m * s.d;        // the two party means
}

uint64_t flow_layer_activation_values(const GraphShape& s) {
    check_shape(s);
    return mp_activation_values(s.m, s.r, s.e_wp, s.d, s.heads) +
           mp_activation_values(s.r, s.m, s.e_wp, s.d, s.heads) +
           mp_activation_values(s.n, s.m, s.e_wc, s.d, s.heads) +
           mp_activation_values(s.m, s.n, s.e_wc, s.d, s.heads) +
           mp_activation_values(s.r, s.m, s.e_wp, s.d, s.heads) +
           2ull * s.r * s.d + 2ull * s.m * s.d;
}

uint64_t vanilla_layer_flops(const GraphShape& s) {
    check_shape(s);
    const long N = s.nodes();
    return count_mp(N, N, 2 * (s.e_wp + s.e_wc), s.d, s.heads);
}

uint64_t vanilla_layer_activation_values(const GraphShape& s) {
    check_shape(s);
    const long N = s.nodes();
    return mp_activation_values(N, N, 2 * (s.e_wp + s.e_wc), s.d, s.heads);
}

CostComparison compare_costs(const GraphShape& s, int l_flow, int l_vanilla,
                             bool tie_mp_params) {
    check_shape(s);
    if (l_flow < 1 || l_vanilla < 1) throw std::runtime_error("cost: layer counts must be >= 1");

    const uint64_t inputs = static_cast<uint64_t>(s.nodes()) * s.d;
    const uint64_t site_params = MpParams::param_count(s.d, s.heads);

    CostComparison cmp;
    cmp.flow.variant = "flow";
    cmp.flow.layers = l_flow;
    cmp.flow.flops = static_cast<uint64_t>(l_flow) * flow_layer_flops(s);
    const uint64_t flow_vals = inputs + l_flow * flow_layer_activation_values(s);
    cmp.flow.peak_mem_bytes = 8 * flow_vals;
    cmp.flow.train_mem_bytes = 16 * flow_vals;  // values + one gradient per value
    cmp.flow.param_count = (tie_mp_params ? 1ull : 5ull) * l_flow * site_params;

    cmp.vanilla.variant = "vanilla";
    cmp.vanilla.layers = l_vanilla;
    cmp.vanilla.flops = static_cast<uint64_t>(l_vanilla) * vanilla_layer_flops(s);
    const uint64_t van_vals = inputs + l_vanilla * vanilla_layer_activation_values(s);
    cmp.vanilla.peak_mem_bytes = 8 * van_vals;
    cmp.vanilla.train_mem_bytes = 16 * van_vals;
    cmp.vanilla.param_count = (tie_mp_params ? 1ull : static_cast<uint64_t>(l_vanilla)) * site_params;

    cmp.flop_reduction =
        1.0 - static_cast<double>(cmp.flow.flops) / static_cast<double>(cmp.vanilla.flops);
    cmp.mem_reduction = 1.0 - static_cast<double>(cmp.flow.peak_mem_bytes) /
                                  static_cast<double>(cmp.vanilla.peak_mem_bytes);
    return cmp;
}

GraphShape reference_profile_shape(long r, long n, long max_nodes, double words_per_post, int d,
                             int heads) {
    GraphShape s;
    s.r = r;
    s.n = n;
    s.m = max_nodes - r - n;
    if (s.m < 0) throw std::runtime_error("cost: max_nodes too small for r + n");
    s.e_wp = std::llround(static_cast<double>(r) * words_per_post);
    s.e_wc = s.m;  // minimal connectivity: one selected category per word
    s.d = d;
    s.heads = heads;
    return s;
}

}  // namespace trignet
