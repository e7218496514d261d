#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "test_util.hpp"
#include "trignet/flow_gat.hpp"
#include "trignet/grad_check.hpp"

using namespace trignet;

namespace {

struct MpFixture {
    ParamStore store;
    MpParams params;
    MpFixture(int d, int heads, uint64_t seed) {
        params = MpParams::create(store, "mp", d, heads, seed);
    }
};

double max_abs_diff(const Mat& got, const oracle::Rows& want) {
    REQUIRE(got.rows == static_cast<int>(want.size()));
    double worst = 0.0;
    for (int i = 0; i < got.rows; ++i) {
        REQUIRE(got.cols == static_cast<int>(want[i].size()));
        for (int j = 0; j < got.cols; ++j)
            worst = std::max(worst, std::fabs(got.at(i, j) - want[i][j]));
    }
    return worst;
}

}  // namespace

TEST_CASE("a query with exactly one neighbor puts all attention on it") {
    MpFixture fx(4, 2, 8);
    SplitMix64 rng(2);
    Tape tape;
    NodeId q = tape.constant(testutil::random_mat(1, 4, rng));
    NodeId c = tape.constant(testutil::random_mat(2, 4, rng));
    MpResult res = message_pass(tape, q, c, {{0, 1}}, place_on_tape(tape, fx.store, fx.params), 2);
    for (NodeId beta : res.beta) {
        REQUIRE(tape.value(beta).rows == 1);
        CHECK(tape.value(beta).at(0, 0) == 1.0);
    }
}

TEST_CASE("a query with no neighbors passes through bitwise unchanged") {
    MpFixture fx(4, 2, 9);
    SplitMix64 rng(3);
    Mat qmat = testutil::random_mat(3, 4, rng);
    Tape tape;
    NodeId q = tape.constant(qmat);
    NodeId c = tape.constant(testutil::random_mat(2, 4, rng));
    // only row 1 has neighbors
    MpResult res = message_pass(tape, q, c, {{1, 0}, {1, 1}},
                                place_on_tape(tape, fx.store, fx.params), 2);
    const Mat& out = tape.value(res.out);
    for (int j = 0; j < 4; ++j) {
        CHECK(out.at(0, j) == qmat.at(0, j));
        CHECK(out.at(2, j) == qmat.at(2, j));
        CHECK(out.at(1, j) != qmat.at(1, j));
    }
}

TEST_CASE("dense message pass matches the explicit-loop reference to 1e-10") {
    MpFixture fx(4, 2, 10);
    SplitMix64 rng(4);
    Mat qmat = testutil::random_mat(2, 4, rng);
    Mat cmat = testutil::random_mat(3, 4, rng);
    EdgeList dense;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 3; ++b) dense.emplace_back(a, b);

    Tape tape;
    NodeId q = tape.constant(qmat);
    NodeId c = tape.constant(cmat);
    MpResult res = message_pass(tape, q, c, dense, place_on_tape(tape, fx.store, fx.params), 2);

    oracle::Rows want = oracle::message_pass(oracle::from_mat(qmat), oracle::from_mat(cmat), dense,
                                             oracle::load_heads(fx.store, fx.params),
                                             kAttnLeakySlope);
    CHECK(max_abs_diff(tape.value(res.out), want) < 1e-10);
}

TEST_CASE("out-of-range edge indices are rejected") {
    MpFixture fx(4, 1, 11);
    Tape tape;
    NodeId q = tape.constant(Mat::filled(2, 4, 0.1));
    NodeId c = tape.constant(Mat::filled(2, 4, 0.1));
    CHECK_THROWS_WITH_AS(
        message_pass(tape, q, c, {{2, 0}}, place_on_tape(tape, fx.store, fx.params), 1),
        doctest::Contains("out of range"), std::runtime_error);
}

TEST_CASE("attention weights per query sum to one on random graphs") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        TripartiteGraph g = testutil::random_graph(rng);
        if (g.wp_edges.empty()) continue;
        MpFixture fx(8, 2, 100 + trial);
        Tape tape;
        NodeId q = tape.constant(testutil::random_mat(g.m(), 8, rng));
        NodeId c = tape.constant(testutil::random_mat(g.r(), 8, rng));
        MpResult res =
            message_pass(tape, q, c, g.wp_edges, place_on_tape(tape, fx.store, fx.params), 2);
        for (NodeId beta : res.beta) {
            std::vector<double> sums(g.m(), 0.0);
            const Mat& b = tape.value(beta);
            for (int e = 0; e < b.rows; ++e) sums[res.beta_segments[e]] += b.at(e, 0);
            for (int i = 0; i < g.m(); ++i) {
                bool has_edge = false;
                for (int s : res.beta_segments) has_edge |= (s == i);
                if (has_edge) CHECK(std::fabs(sums[i] - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("flow layer matches the literal schedule reference on the example graph") {
    // the two-post example: 2 posts, 5 words, 3 categories
    TripartiteGraph g;
    g.posts = {"p1", "p2"};
    g.words = {"for", "good", "love", "me", "thanks"};
    g.cats = {1, 2, 3};
    g.wp_edges = {{0, 0}, {0, 1}, {1, 0}, {2, 1}, {3, 0}, {4, 1}};
    g.wc_edges = {{0, 0}, {1, 1}, {2, 1}, {3, 0}, {4, 2}};

    ParamStore store;
    FgatParams params = FgatParams::create(store, "fgat", 8, 2, 77, false);
    SplitMix64 rng(6);
    Mat hp = testutil::random_mat(2, 8, rng);
    Mat hw = testutil::random_mat(5, 8, rng);
    Mat hc = testutil::random_mat(3, 8, rng);

    Tape tape;
    NodeStates in{tape.constant(hp), tape.constant(hw), tape.constant(hc)};
    NodeStates out = fgat_layer(tape, in, g, place_on_tape(tape, store, params), 2, FlowMode::Both);

    oracle::FlowStates oin{oracle::from_mat(hp), oracle::from_mat(hw), oracle::from_mat(hc)};
    oracle::FlowStates want = oracle::fgat_layer(oin, g, store, params, kAttnLeakySlope);

    CHECK(max_abs_diff(tape.value(out.posts), want.posts) < 1e-10);
    CHECK(max_abs_diff(tape.value(out.words), want.words) < 1e-10);
    CHECK(max_abs_diff(tape.value(out.cats), want.cats) < 1e-10);
}

TEST_CASE("flow layer equals the reference on many random tiny graphs") {
    SplitMix64 rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        TripartiteGraph g = testutil::random_graph(rng);
        const int heads = 1 + static_cast<int>(rng.next_below(2));
        const int d = heads * (2 + static_cast<int>(rng.next_below(3)));
        ParamStore store;
        FgatParams params = FgatParams::create(store, "fgat", d, heads, 500 + trial, false);
        Mat hp = testutil::random_mat(g.r(), d, rng);
        Mat hw = testutil::random_mat(g.m(), d, rng);
        Mat hc = testutil::random_mat(g.n(), d, rng);

        Tape tape;
        NodeStates in{tape.constant(hp), tape.constant(hw), tape.constant(hc)};
        NodeStates out =
            fgat_layer(tape, in, g, place_on_tape(tape, store, params), heads, FlowMode::Both);

        oracle::FlowStates oin{oracle::from_mat(hp), oracle::from_mat(hw), oracle::from_mat(hc)};
        oracle::FlowStates want = oracle::fgat_layer(oin, g, store, params, kAttnLeakySlope);
        CHECK(max_abs_diff(tape.value(out.posts), want.posts) < 1e-10);
        CHECK(max_abs_diff(tape.value(out.words), want.words) < 1e-10);
        CHECK(max_abs_diff(tape.value(out.cats), want.cats) < 1e-10);
    }
}

TEST_CASE("wordless graphs are fixed points of the layer") {
    TripartiteGraph g;
    g.posts = {"p1", "p2"};
    g.cats = {1, 2};
    ParamStore store;
    FgatParams params = FgatParams::create(store, "fgat", 8, 2, 12, false);
    SplitMix64 rng(8);
    Mat hp = testutil::random_mat(2, 8, rng);
    Mat hc = testutil::random_mat(2, 8, rng);

    Tape tape;
    NodeStates in{tape.constant(hp), tape.constant(Mat(0, 8)), tape.constant(hc)};
    NodeStates out = fgat_layer(tape, in, g, place_on_tape(tape, store, params), 2, FlowMode::Both);
    CHECK(tape.value(out.posts).data == hp.data);
    CHECK(tape.value(out.cats).data == hc.data);
}

TEST_CASE("with both flows disabled the layer is the identity") {
    TripartiteGraph g;
    g.posts = {"p1"};
    g.words = {"w1"};
    g.cats = {1};
    g.wp_edges = {{0, 0}};
    g.wc_edges = {{0, 0}};
    ParamStore store;
    FgatParams params = FgatParams::create(store, "fgat", 4, 1, 13, false);
    SplitMix64 rng(9);
    Mat hp = testutil::random_mat(1, 4, rng);
    Mat hw = testutil::random_mat(1, 4, rng);
    Mat hc = testutil::random_mat(1, 4, rng);
    Tape tape;
    NodeStates in{tape.constant(hp), tape.constant(hw), tape.constant(hc)};
    NodeStates out = fgat_layer(tape, in, g, place_on_tape(tape, store, params), 1, FlowMode::None);
    CHECK(out.posts == in.posts);
    CHECK(out.words == in.words);
    CHECK(out.cats == in.cats);
}

TEST_CASE("single-flow ablations keep the other party states untouched") {
    SplitMix64 rng(91);
    TripartiteGraph g = testutil::random_graph(rng);
    ParamStore store;
    FgatParams params = FgatParams::create(store, "fgat", 8, 2, 14, false);
    Mat hp = testutil::random_mat(g.r(), 8, rng);
    Mat hw = testutil::random_mat(g.m(), 8, rng);
    Mat hc = testutil::random_mat(g.n(), 8, rng);

    Tape tape;
    NodeStates in{tape.constant(hp), tape.constant(hw), tape.constant(hc)};
    NodeStates f1 = fgat_layer(tape, in, g, place_on_tape(tape, store, params), 2,
                               FlowMode::Flow1Only);
    // the word-post flow alone leaves the categories at their input
    CHECK(tape.value(f1.cats).data == hc.data);
}

TEST_CASE("vanilla layer: isolated nodes unchanged, star graph updates both directions") {
    // star: 1 word connected to 2 posts, plus one isolated category node
    TripartiteGraph g;
    g.posts = {"p1", "p2"};
    g.words = {"w1"};
    g.cats = {1};
    g.wp_edges = {{0, 0}, {0, 1}};

    ParamStore store;
    MpParams params = MpParams::create(store, "van", 4, 1, 15);
    SplitMix64 rng(10);
    Mat x = testutil::random_mat(4, 4, rng);  // rows: p1 p2 w1 c1

    EdgeList adj = vanilla_adjacency(g);
    REQUIRE(adj.size() == 4);  // both directions of both edges

    Tape tape;
    NodeId states = tape.constant(x);
    NodeId out = vanilla_gat_layer(tape, states, adj, place_on_tape(tape, store, params), 1);
    const Mat& y = tape.value(out);

    for (int j = 0; j < 4; ++j) {
        CHECK(y.at(3, j) == x.at(3, j));  // isolated category: residual only
        CHECK(y.at(0, j) != x.at(0, j));
        CHECK(y.at(2, j) != x.at(2, j));
    }

    // against the literal reference on the flattened graph
    oracle::Rows want = oracle::message_pass(oracle::from_mat(x), oracle::from_mat(x), adj,
                                             oracle::load_heads(store, params), kAttnLeakySlope);
    CHECK(max_abs_diff(y, want) < 1e-10);
}

TEST_CASE("one vanilla layer cannot mix two posts that share a word") {
    // p1 - w1 - p2: after ONE homogeneous update, p1 depends on w1 only,
    // so perturbing p2 must not change p1's output
    TripartiteGraph g;
    g.posts = {"p1", "p2"};
    g.words = {"w1"};
    g.cats = {1};
    g.wp_edges = {{0, 0}, {0, 1}};
    EdgeList adj = vanilla_adjacency(g);

    ParamStore store;
    MpParams params = MpParams::create(store, "van", 4, 1, 16);
    SplitMix64 rng(11);
    Mat x = testutil::random_mat(4, 4, rng);
    Mat x2 = x;
    x2.at(1, 2) += 0.5;  // perturb p2

    auto run = [&](const Mat& input) {
        Tape tape;
        NodeId out = vanilla_gat_layer(tape, tape.constant(input), adj,
                                       place_on_tape(tape, store, params), 1);
        return tape.value(out);
    };
    Mat y1 = run(x), y2 = run(x2);
    for (int j = 0; j < 4; ++j) {
        CHECK(y1.at(0, j) == y2.at(0, j));  // p1 unaffected after one layer
        CHECK(y1.at(2, j) != y2.at(2, j));  // the shared word does see it
    }
}

TEST_CASE("flow layer gradients pass the finite-difference check") {
    SplitMix64 rng(300);
    TripartiteGraph g = testutil::random_graph(rng, 4);
    ParamStore store;
    FgatParams params = FgatParams::create(store, "fgat", 4, 2, 17, false);
    Mat hp = testutil::random_mat(g.r(), 4, rng);
    Mat hw = testutil::random_mat(g.m(), 4, rng);
    Mat hc = testutil::random_mat(g.n(), 4, rng);

    LossBuilder builder = [&](Tape& tape, const ParamStore& s) -> NodeId {
        NodeStates in{tape.constant(hp), tape.constant(hw), tape.constant(hc)};
        NodeStates out = fgat_layer(tape, in, g, place_on_tape(tape, s, params), 2, FlowMode::Both);
        // weigh all three parties into one scalar
        NodeId sum = tape.mean_rows(out.posts);
        if (g.m() > 0) sum = tape.add(sum, tape.mean_rows(out.words));
        sum = tape.add(sum, tape.mean_rows(out.cats));
        Mat ones(4, 1);
        for (double& v : ones.data) v = 1.0;
        return tape.matmul(sum, tape.constant(ones));
    };
    CHECK(grad_check(builder, store, 1e-5) < 1e-4);
}

TEST_CASE("tied parameters register one site and reuse it five times") {
    ParamStore tied_store;
    FgatParams tied = FgatParams::create(tied_store, "fgat", 8, 2, 18, true);
    ParamStore untied_store;
    FgatParams untied = FgatParams::create(untied_store, "fgat", 8, 2, 18, false);
    CHECK(tied_store.size() * 5 == untied_store.size());
    CHECK(tied.p_from_w.heads[0].Ww == tied.w_from_p.heads[0].Ww);
    CHECK(untied.p_from_w.heads[0].Ww != untied.w_from_p.heads[0].Ww);
}

TEST_CASE("flow-1 reachability: post-to-post sensitivity iff a shared word exists") {
    SplitMix64 rng(400);
    int checked_pairs = 0;
    for (int trial = 0; trial < 12; ++trial) {
        TripartiteGraph g = testutil::random_graph(rng, 4);
        if (g.r() < 2) continue;
        const int d = 8, heads = 2;
        ParamStore store;
        FgatParams params = FgatParams::create(store, "fgat", d, heads, 4100 + trial, false);
        Mat hp = testutil::random_mat(g.r(), d, rng);
        Mat hw = testutil::random_mat(g.m(), d, rng);
        Mat hc = testutil::random_mat(g.n(), d, rng);

        auto posts_out = [&](const Mat& posts_in) {
            Tape tape;
            NodeStates in{tape.constant(posts_in), tape.constant(hw), tape.constant(hc)};
            NodeStates out = fgat_layer(tape, in, g, place_on_tape(tape, store, params), heads,
                                        FlowMode::Flow1Only);
            return tape.value(out.posts);
        };
        Mat base = posts_out(hp);

        auto share_word = [&](int a, int b) {
            for (const auto& [w1, p1] : g.wp_edges)
                if (p1 == a)
                    for (const auto& [w2, p2] : g.wp_edges)
                        if (p2 == b && w1 == w2) return true;
            return false;
        };

        for (int src = 0; src < g.r(); ++src) {
            Mat perturbed_in = hp;
            for (int j = 0; j < d; ++j) perturbed_in.at(src, j) += 1e-3;
            Mat perturbed = posts_out(perturbed_in);
            for (int dst = 0; dst < g.r(); ++dst) {
                if (dst == src) continue;
                double diff = 0.0;
                for (int j = 0; j < d; ++j)
                    diff = std::max(diff, std::fabs(perturbed.at(dst, j) - base.at(dst, j)));
                if (share_word(dst, src))
                    CHECK(diff > 1e-9);
                else
                    CHECK(diff == 0.0);
                ++checked_pairs;
            }
        }
    }
    CHECK(checked_pairs > 20);  // the generator must have produced real cases
}

TEST_CASE("flow-2 reachability: sensitivity propagates through shared categories") {
    // p1-w1-c1-w2-p2 with no shared word
    TripartiteGraph g;
    g.posts = {"p1", "p2"};
    g.words = {"w1", "w2"};
    g.cats = {1};
    g.wp_edges = {{0, 0}, {1, 1}};
    g.wc_edges = {{0, 0}, {1, 0}};
    const int d = 8, heads = 2;
    ParamStore store;
    FgatParams params = FgatParams::create(store, "fgat", d, heads, 4200, false);
    SplitMix64 rng(401);
    Mat hp = testutil::random_mat(2, d, rng);
    Mat hw = testutil::random_mat(2, d, rng);
    Mat hc = testutil::random_mat(1, d, rng);

    auto posts_out = [&](const Mat& posts_in, FlowMode mode) {
        Tape tape;
        NodeStates in{tape.constant(posts_in), tape.constant(hw), tape.constant(hc)};
        NodeStates out = fgat_layer(tape, in, g, place_on_tape(tape, store, params), heads, mode);
        return tape.value(out.posts);
    };
    Mat perturbed_in = hp;
    for (int j = 0; j < d; ++j) perturbed_in.at(1, j) += 1e-3;

    Mat f2_base = posts_out(hp, FlowMode::Flow2Only);
    Mat f2_pert = posts_out(perturbed_in, FlowMode::Flow2Only);
    double f2_diff = 0.0;
    for (int j = 0; j < d; ++j)
        f2_diff = std::max(f2_diff, std::fabs(f2_pert.at(0, j) - f2_base.at(0, j)));
    CHECK(f2_diff > 1e-9);

    // flow 1 alone cannot cross the category bridge
    Mat f1_base = posts_out(hp, FlowMode::Flow1Only);
    Mat f1_pert = posts_out(perturbed_in, FlowMode::Flow1Only);
    for (int j = 0; j < d; ++j) CHECK(f1_pert.at(0, j) == f1_base.at(0, j));
}
