#include <doctest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "trignet/model.hpp"

using namespace trignet;

namespace {

LiwcDictionary tiny_dict() {
    std::istringstream in(
        "%\n1\talpha\tmain\n2\tbeta\tmain\n3\tgamma\tmain\n%\n"
        "apple\t1\nberry\t1 2\ncedar\t2\ndelta\t2 3\nember\t3\nfrost\t3 1\n");
    return parse_dictionary(in);
}

ModelConfig tiny_cfg() {
    ModelConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.dropout = 0.0;
    cfg.seed = 3;
    cfg.category_names = {"alpha", "beta", "gamma"};
    return cfg;
}

UserExample tiny_user() {
    UserExample u;
    u.id = "tiny";
    u.posts = {"apple berry cedar delta", "berry cedar delta ember frost",
               "apple delta ember frost berry"};
    u.labels = {1, 0, 1, 0};
    return u;
}

TrigNet tiny_model(ModelConfig cfg = tiny_cfg()) {
    TrigNet model(cfg, tiny_dict(), EmbeddingProvider::hash_stub(cfg.d, cfg.seed));
    model.init_params();
    return model;
}

PostLayerVectors basis_vectors() {
    PostLayerVectors v;
    v.layer10 = {1, 0, 0};
    v.layer11 = {0, 1, 0};
    v.layer12 = {0, 0, 1};
    return v;
}

}  // namespace

TEST_CASE("layer attention: identical layer vectors collapse to themselves") {
    Tape tape;
    PostLayerVectors v;
    v.layer10 = v.layer11 = v.layer12 = {0.4, -0.2, 0.9};
    NodeId logits = tape.constant(Mat(1, 3, {2.0, -1.0, 0.5}));
    NodeId xp = init_post_nodes(tape, {v}, logits, 3);
    CHECK(tape.value(xp).at(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(tape.value(xp).at(0, 1) == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(tape.value(xp).at(0, 2) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("layer attention: zero logits average the three layers") {
    Tape tape;
    NodeId logits = tape.constant(Mat(1, 3));
    NodeId xp = init_post_nodes(tape, {basis_vectors()}, logits, 3);
    for (int j = 0; j < 3; ++j)
        CHECK(tape.value(xp).at(0, j) == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("layer attention: logits (ln 2, 0, 0) weigh the layers (0.5, 0.25, 0.25)") {
    Tape tape;
    NodeId logits = tape.constant(Mat(1, 3, {std::log(2.0), 0.0, 0.0}));
    NodeId xp = init_post_nodes(tape, {basis_vectors()}, logits, 3);
    CHECK(tape.value(xp).at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(tape.value(xp).at(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(tape.value(xp).at(0, 2) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("layer attention rejects a missing layer vector") {
    Tape tape;
    PostLayerVectors bad;
    bad.layer10 = {1, 2, 3};
    bad.layer11 = {1, 2, 3};
    NodeId logits = tape.constant(Mat(1, 3));
    CHECK_THROWS_AS(init_post_nodes(tape, {bad}, logits, 3), std::runtime_error);
}

TEST_CASE("forward: trait probabilities sum to one") {
    TrigNet model = tiny_model();
    ForwardOut out = model.forward(tiny_user());
    REQUIRE(out.probs.rows == 4);
    for (int t = 0; t < 4; ++t)
        CHECK(std::fabs(out.probs.at(t, 0) + out.probs.at(t, 1) - 1.0) < 1e-12);
}

TEST_CASE("forward: a single post with no dictionary words is a residual fixed point") {
    ModelConfig cfg = tiny_cfg();
    TrigNet model = tiny_model(cfg);
    UserExample u;
    u.id = "lonely";
    u.posts = {"nothing matches here"};
    u.labels = {0, 0, 0, 0};
    ForwardOut out = model.forward(u);
    CHECK(out.stats.m == 0);
    CHECK(out.stats.disconnected_posts == 1);

    // the user representation is the layer-attention mix itself: rebuild it
    auto provider = EmbeddingProvider::hash_stub(cfg.d, cfg.seed);
    auto plv = provider.post_layer_vectors("lonely:p1");
    Tape tape;
    NodeId logits = tape.param(model.params(), "layer_attn.logits");
    NodeId xp = init_post_nodes(tape, {plv}, logits, cfg.d);
    Tape t2;
    NodeId w = t2.param(model.params(), "trait0.W");
    NodeId b = t2.param(model.params(), "trait0.b");
    NodeId probs = t2.masked_row_softmax(t2.add(t2.matmul(t2.constant(tape.value(xp)), w), b));
    CHECK(out.probs.at(0, 0) == doctest::Approx(t2.value(probs).at(0, 0)).epsilon(1e-12));
}

TEST_CASE("forward: permuting posts (with their layer vectors) leaves probabilities unchanged") {
    // post vectors are keyed by position ("<user>:p<k>"), so a fair
    // permutation moves the stored vectors along with the post texts
    ModelConfig cfg = tiny_cfg();
    const std::vector<std::string> texts = {"apple berry cedar delta",
                                            "berry cedar delta ember frost",
                                            "apple delta ember frost berry"};
    auto provider_for = [&](const std::vector<int>& order) {
        std::map<std::string, std::vector<double>> words;
        std::map<std::pair<std::string, int>, std::vector<double>> posts;
        auto fill = [&](const std::string& key) {
            SplitMix64 rng(stable_hash(17, key));
            std::vector<double> v(cfg.d);
            for (double& x : v) x = rng.next_uniform(-0.5, 0.5);
            return v;
        };
        for (const char* w : {"apple", "berry", "cedar", "delta", "ember", "frost",
                              "alpha", "beta", "gamma"})
            words[w] = fill(w);
        for (size_t slot = 0; slot < order.size(); ++slot)
            for (int layer : {10, 11, 12})
                posts[{"perm:p" + std::to_string(slot + 1), layer}] =
                    fill("post" + std::to_string(order[slot]) + ":" + std::to_string(layer));
        return EmbeddingProvider::from_table(cfg.d, cfg.seed, std::move(words), std::move(posts));
    };

    UserExample u;
    u.id = "perm";
    u.labels = {1, 0, 1, 0};

    u.posts = {texts[0], texts[1], texts[2]};
    TrigNet straight(cfg, tiny_dict(), provider_for({0, 1, 2}));
    straight.init_params();
    ForwardOut a = straight.forward(u);

    u.posts = {texts[2], texts[0], texts[1]};
    TrigNet rotated(cfg, tiny_dict(), provider_for({2, 0, 1}));
    rotated.init_params();
    ForwardOut b = rotated.forward(u);

    for (int t = 0; t < 4; ++t)
        for (int c = 0; c < 2; ++c)
            CHECK(a.probs.at(t, c) == doctest::Approx(b.probs.at(t, c)).epsilon(1e-12));
}

TEST_CASE("loss: exact one-hot probabilities give zero loss") {
    Mat probs(4, 2, {1, 0, 0, 1, 1, 0, 0, 1});
    CHECK(nll_loss(probs, {0, 1, 0, 1}) == 0.0);
}

TEST_CASE("loss: uniform probabilities give 4 ln 2") {
    Mat probs = Mat::filled(4, 2, 0.5);
    CHECK(nll_loss(probs, {0, 1, 1, 0}) == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss: a zero probability is clamped to -log(1e-12)") {
    Mat probs(1, 2, {0.0, 1.0});
    CHECK(nll_loss(probs, {0}) == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
}

TEST_CASE("training with lr=0 leaves every parameter unchanged") {
    ModelConfig cfg = tiny_cfg();
    cfg.lr_graph = 0.0;
    cfg.epochs = 3;
    cfg.batch_size = 2;
    TrigNet model = tiny_model(cfg);
    std::vector<Mat> before;
    for (const auto& e : model.params().entries()) before.push_back(e.value);

    std::vector<UserExample> data = {tiny_user(), tiny_user(), tiny_user()};
    data[1].id = "u2";
    data[2].id = "u3";
    model.train(data, {});
    size_t i = 0;
    for (const auto& e : model.params().entries()) CHECK(e.value.data == before[i++].data);
}

TEST_CASE("training twice with the same seed gives identical histories") {
    auto run = [] {
        ModelConfig cfg = tiny_cfg();
        cfg.epochs = 5;
        cfg.dropout = 0.2;  // exercise the dropout rng determinism too
        TrigNet model(cfg, tiny_dict(), EmbeddingProvider::hash_stub(cfg.d, cfg.seed));
        model.init_params();
        std::vector<UserExample> data = {tiny_user(), tiny_user()};
        data[1].id = "other";
        return model.train(data, {data[0]});
    };
    TrainHistory a = run(), b = run();
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (size_t i = 0; i < a.epochs.size(); ++i) {
        CHECK(a.epochs[i].train_loss == b.epochs[i].train_loss);
        CHECK(a.epochs[i].val_avg_f1 == b.epochs[i].val_avg_f1);
    }
}

TEST_CASE("training on an empty dataset is an error") {
    TrigNet model = tiny_model();
    CHECK_THROWS_WITH_AS(model.train({}, {}), doctest::Contains("empty"), std::runtime_error);
}

TEST_CASE("macro F1: hand-built confusion matrices") {
    TraitConfusion balanced;  // TP=1 FP=1 FN=1 TN=1 for both classes
    balanced.counts[0][0] = 1;
    balanced.counts[0][1] = 1;
    balanced.counts[1][0] = 1;
    balanced.counts[1][1] = 1;
    CHECK(macro_f1(balanced) == doctest::Approx(0.5).epsilon(1e-12));

    TraitConfusion perfect;
    perfect.counts[0][0] = 3;
    perfect.counts[1][1] = 5;
    CHECK(macro_f1(perfect) == 1.0);

    // constant predictor: always class 1 on a 3-vs-5 split
    TraitConfusion constant;
    constant.counts[0][1] = 3;
    constant.counts[1][1] = 5;
    // class 1: P = 5/8, R = 1 -> F1 = 10/13; class 0: F1 = 0
    CHECK(macro_f1(constant) == doctest::Approx(0.5 * (10.0 / 13.0)).epsilon(1e-12));
}

TEST_CASE("evaluate: all-correct predictions give average F1 of 1") {
    ModelConfig cfg = tiny_cfg();
    cfg.epochs = 60;
    cfg.batch_size = 4;
    cfg.lr_graph = 0.05;  // overfit four users quickly
    TrigNet model = tiny_model(cfg);
    std::vector<UserExample> data;
    const char* posts[4][2] = {{"apple berry", "cedar apple"},
                               {"delta ember", "frost delta"},
                               {"berry frost", "ember berry"},
                               {"cedar delta", "apple frost"}};
    for (int i = 0; i < 4; ++i) {
        UserExample u;
        u.id = "u" + std::to_string(i);
        u.posts = {posts[i][0], posts[i][1]};
        u.labels = {i % 2, (i / 2) % 2, i % 2, 1 - i % 2};
        data.push_back(u);
    }
    model.train(data, {});
    EvalReport r = model.evaluate(data);
    CHECK(r.average_f1 == doctest::Approx(1.0));
    for (double f1 : r.per_trait_f1) CHECK(f1 == doctest::Approx(1.0));
}

TEST_CASE("evaluate on an empty dataset is an error") {
    TrigNet model = tiny_model();
    CHECK_THROWS_WITH_AS(model.evaluate({}), doctest::Contains("empty"), std::runtime_error);
}

TEST_CASE("layer weights: zero logits report the uniform distribution and always sum to 1") {
    TrigNet model = tiny_model();
    auto w = model.layer_weights();
    for (double v : w) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

    model.params().get_mut("layer_attn.logits") = Mat(1, 3, {1.0, 0.0, -1.0});
    w = model.layer_weights();
    CHECK(w[0] == doctest::Approx(0.6652).epsilon(1e-3));
    CHECK(w[1] == doctest::Approx(0.2447).epsilon(1e-3));
    CHECK(w[2] == doctest::Approx(0.0900).epsilon(1e-2));
    CHECK(std::fabs(w[0] + w[1] + w[2] - 1.0) < 1e-12);
}

TEST_CASE("with both flows off the forward is independent of the dictionary edges") {
    ModelConfig cfg = tiny_cfg();
    cfg.flows = FlowMode::None;
    UserExample u = tiny_user();

    TrigNet with_words(cfg, tiny_dict(), EmbeddingProvider::hash_stub(cfg.d, cfg.seed));
    with_words.init_params();
    // a dictionary where nothing matches: totally different graph
    std::istringstream empty_in("%\n1\talpha\tmain\n2\tbeta\tmain\n3\tgamma\tmain\n%\nqqq\t1\n");
    TrigNet without_words(cfg, parse_dictionary(empty_in),
                          EmbeddingProvider::hash_stub(cfg.d, cfg.seed));
    without_words.init_params();

    ForwardOut a = with_words.forward(u);
    ForwardOut b = without_words.forward(u);
    REQUIRE(a.stats.m != b.stats.m);
    for (int t = 0; t < 4; ++t)
        for (int c = 0; c < 2; ++c) CHECK(a.probs.at(t, c) == b.probs.at(t, c));
}

TEST_CASE("end-to-end gradients pass the tiny finite-difference check") {
    CHECK(grad_check_tiny(1e-5) < 1e-4);
}

TEST_CASE("early stopping honors the patience setting") {
    ModelConfig cfg = tiny_cfg();
    cfg.epochs = 100;
    cfg.patience = 3;
    cfg.lr_graph = 0.0;  // validation F1 can never improve
    TrigNet model = tiny_model(cfg);
    std::vector<UserExample> data = {tiny_user()};
    TrainHistory h = model.train(data, data);
    CHECK(h.stopped_early);
    CHECK(h.epochs.size() < 100);
}

TEST_CASE("loss is non-negative for any probability matrix") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        Mat probs(4, 2);
        for (int t = 0; t < 4; ++t) {
            const double p = rng.next_unit();
            probs.at(t, 0) = p;
            probs.at(t, 1) = 1.0 - p;
        }
        std::vector<int> labels;
        for (int t = 0; t < 4; ++t) labels.push_back(static_cast<int>(rng.next_below(2)));
        CHECK(nll_loss(probs, labels) >= 0.0);
    }
}

TEST_CASE("grad_check rejects a non-finite loss") {
    ParamStore store;
    store.create("w", 1, 1);
    store.get_mut("w").at(0, 0) = 400.0;
    LossBuilder exploding = [](Tape& t, const ParamStore& s) {
        NodeId w = t.param(s, "w");
        // exp(w)-like blowup via repeated squaring: w^8 at w=400 overflows
        NodeId x = t.mul_scalar_node(w, t.pick(w, 0, 0));
        x = t.mul_scalar_node(x, t.pick(x, 0, 0));
        x = t.mul_scalar_node(x, t.pick(x, 0, 0));
        NodeId big = t.scale(x, 1e280);
        return t.scale(big, 1e280);
    };
    CHECK_THROWS_AS(grad_check(exploding, store, 1e-5), std::runtime_error);
}
