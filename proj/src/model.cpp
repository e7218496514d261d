#include "trignet/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace trignet {

NodeId init_post_nodes(Tape& tape, const std::vector<PostLayerVectors>& layers, NodeId logits,
                       int d) {
    const int r = static_cast<int>(layers.size());
    if (r == 0) throw std::runtime_error("init_post_nodes: no posts");
    Mat x10(r, d), x11(r, d), x12(r, d);
    for (int i = 0; i < r; ++i) {
        const auto& l = layers[i];
        if (static_cast<int>(l.layer10.size()) != d || static_cast<int>(l.layer11.size()) != d ||
            static_cast<int>(l.layer12.size()) != d)
            throw std::runtime_error("init_post_nodes: missing or mis-sized layer vector for post " +
                                     std::to_string(i));
        for (int j = 0; j < d; ++j) {
            x10.at(i, j) = l.layer10[j];
            x11.at(i, j) = l.layer11[j];
            x12.at(i, j) = l.layer12[j];
        }
    }
    const Mat& lg = tape.value(logits);
    if (lg.rows != 1 || lg.cols != 3)
        throw std::runtime_error("init_post_nodes: logits must be 1x3");
    NodeId weights = tape.masked_row_softmax(logits);
    NodeId acc = tape.mul_scalar_node(tape.constant(std::move(x10)), tape.pick(weights, 0, 0));
    acc = tape.add(acc, tape.mul_scalar_node(tape.constant(std::move(x11)), tape.pick(weights, 0, 1)));
    acc = tape.add(acc, tape.mul_scalar_node(tape.constant(std::move(x12)), tape.pick(weights, 0, 2)));
    return acc;
}

double nll_loss(const Mat& probs, const std::vector<int>& labels) {
    if (probs.rows != static_cast<int>(labels.size()) || probs.cols != 2)
        throw std::runtime_error("nll_loss: probs must be traits x 2");
    double j = 0.0;
    for (int t = 0; t < probs.rows; ++t) {
        if (labels[t] != 0 && labels[t] != 1) throw std::runtime_error("nll_loss: labels must be 0/1");
        j += -std::log(std::max(probs.at(t, labels[t]), 1e-12));
    }
    return j;
}

double macro_f1(const TraitConfusion& c) {
    double sum = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double tp = static_cast<double>(c.counts[k][k]);
        const double fp = static_cast<double>(c.counts[1 - k][k]);
        const double fn = static_cast<double>(c.counts[k][1 - k]);
        const double precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
        const double recall = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
        sum += (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return sum / 2.0;
}

TrigNet::TrigNet(ModelConfig cfg, LiwcDictionary dict, EmbeddingProvider provider)
    : cfg_(std::move(cfg)), dict_(std::move(dict)), provider_(std::move(provider)) {
    cfg_.validate();
    if (provider_.dim() != cfg_.d)
        throw std::runtime_error("embedding width " + std::to_string(provider_.dim()) +
                                 " does not match configured d=" + std::to_string(cfg_.d));
    sel_ = select_categories(dict_, cfg_.effective_category_names());
}

void TrigNet::init_params() {
    store_ = ParamStore();
    layer_params_.clear();
    store_.create("layer_attn.logits", 1, 3);  // zeros: uniform layer weights
    for (int l = 0; l < cfg_.layers; ++l)
        layer_params_.push_back(FgatParams::create(store_, "fgat" + std::to_string(l), cfg_.d,
                                                   cfg_.heads, cfg_.seed, cfg_.tie_mp_params));
    for (int t = 0; t < cfg_.traits; ++t) {
        const std::string base = "trait" + std::to_string(t) + ".";
        store_.create_glorot(base + "W", cfg_.d, 2, cfg_.d, 2, cfg_.seed);
        store_.create(base + "b", 1, 2);  // zeros
    }
    params_ready_ = true;
}

void TrigNet::load_params(ParamStore store) {
    layer_params_.clear();
    for (int l = 0; l < cfg_.layers; ++l)
        layer_params_.push_back(
            FgatParams::reference("fgat" + std::to_string(l), cfg_.heads, cfg_.tie_mp_params));
    auto expect = [&](const std::string& name, int rows, int cols) {
        const Mat& m = store.get(name);  // throws if absent
        if (m.rows != rows || m.cols != cols)
            throw std::runtime_error("checkpoint parameter " + name + " has shape " + shape_str(m) +
                                     ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    };
    expect("layer_attn.logits", 1, 3);
    for (const auto& lp : layer_params_)
        for (const auto& h : lp.w_from_p.heads) expect(h.Ww, cfg_.d, cfg_.head_dim());
    for (int t = 0; t < cfg_.traits; ++t) {
        expect("trait" + std::to_string(t) + ".W", cfg_.d, 2);
        expect("trait" + std::to_string(t) + ".b", 1, 2);
    }
    store_ = std::move(store);
    params_ready_ = true;
}

TripartiteGraph TrigNet::user_graph(const UserExample& user) const {
    if (user.posts.empty()) throw std::runtime_error("empty user");
    std::vector<TokenizedPost> posts;
    std::vector<std::string> ids;
    const int r = std::min<int>(static_cast<int>(user.posts.size()), cfg_.max_posts);
    for (int i = 0; i < r; ++i) {
        posts.push_back(
            scrub_label_words(tokenize(user.posts[i], cfg_.max_post_len), cfg_.scrub_lexicon));
        ids.push_back(user.id + ":p" + std::to_string(i + 1));
    }
    return build_graph(posts, dict_, sel_, cfg_, ids);
}

namespace {

Mat dropout_mask(int rows, int cols, double rate, SplitMix64& rng) {
    Mat mask(rows, cols);
    const double keep = 1.0 - rate;
    for (double& v : mask.data) v = (rng.next_unit() < keep) ? 1.0 / keep : 0.0;
    return mask;
}

}  // namespace

NodeId TrigNet::forward_on_tape(Tape& tape, const UserExample& user, bool training,
                                SplitMix64* dropout_rng, ForwardOut* out) const {
    if (!params_ready_) throw std::runtime_error("forward: parameters not initialized");
    if (training && cfg_.dropout > 0.0 && dropout_rng == nullptr)
        throw std::runtime_error("forward: training mode needs a dropout rng");

    TripartiteGraph g = user_graph(user);
    if (out) out->stats = graph_stats(g);

    // initial post states via layer attention over the three stored layers
    std::vector<PostLayerVectors> plv;
    for (const auto& pid : g.posts) plv.push_back(provider_.post_layer_vectors(pid));
    NodeId logits = tape.param(store_, "layer_attn.logits");
    NodeId xp = init_post_nodes(tape, plv, logits, cfg_.d);
    if (out) out->layer_weights = logits;

    Mat xw_mat(g.m(), cfg_.d);
    for (int i = 0; i < g.m(); ++i) {
        const auto vec = provider_.embed_token(g.words[i]);
        for (int j = 0; j < cfg_.d; ++j) xw_mat.at(i, j) = vec[j];
    }
    Mat xc_mat(g.n(), cfg_.d);
    for (int i = 0; i < g.n(); ++i) {
        const auto vec = provider_.embed_token(dict_.categories.at(g.cats[i]).name);
        for (int j = 0; j < cfg_.d; ++j) xc_mat.at(i, j) = vec[j];
    }
    NodeId xw = tape.constant(std::move(xw_mat));
    NodeId xc = tape.constant(std::move(xc_mat));

    if (training && cfg_.dropout > 0.0) {
        xp = tape.hadamard_const(xp, dropout_mask(g.r(), cfg_.d, cfg_.dropout, *dropout_rng));
        xw = tape.hadamard_const(xw, dropout_mask(g.m(), cfg_.d, cfg_.dropout, *dropout_rng));
        xc = tape.hadamard_const(xc, dropout_mask(g.n(), cfg_.d, cfg_.dropout, *dropout_rng));
    }

    NodeStates states{xp, xw, xc};
    for (int l = 0; l < cfg_.layers; ++l) {
        FgatParamNodes nodes = place_on_tape(tape, store_, layer_params_[l]);
        states = fgat_layer(tape, states, g, nodes, cfg_.heads, cfg_.flows);
    }

    NodeId user_repr = tape.mean_rows(states.posts);  // 1 x d

    Mat probs(cfg_.traits, 2);
    NodeId loss = -1;
    const bool labelled = !user.labels.empty();
    if (labelled && static_cast<int>(user.labels.size()) != cfg_.traits)
        throw std::runtime_error("forward: user '" + user.id + "' has " +
                                 std::to_string(user.labels.size()) + " labels, expected " +
                                 std::to_string(cfg_.traits));
    for (int t = 0; t < cfg_.traits; ++t) {
        const std::string base = "trait" + std::to_string(t) + ".";
        NodeId logits_t = tape.add(tape.matmul(user_repr, tape.param(store_, base + "W")),
                                   tape.param(store_, base + "b"));
        NodeId probs_t = tape.masked_row_softmax(logits_t);
        probs.at(t, 0) = tape.value(probs_t).at(0, 0);
        probs.at(t, 1) = tape.value(probs_t).at(0, 1);
        if (labelled) {
            NodeId term = tape.neg_log_clamped(tape.pick(probs_t, 0, user.labels[t]));
            loss = (loss < 0) ? term : tape.add(loss, term);
        }
    }
    if (out) out->probs = std::move(probs);
    return loss;
}

ForwardOut TrigNet::forward(const UserExample& user, bool training,
                            SplitMix64* dropout_rng) const {
    ForwardOut out;
    out.loss = forward_on_tape(out.tape, user, training, dropout_rng, &out);
    return out;
}

NodeId TrigNet::forward_loss_on(Tape& tape, const UserExample& user) const {
    if (user.labels.empty())
        throw std::runtime_error("forward_loss_on: user '" + user.id + "' has no labels");
    return forward_on_tape(tape, user, false, nullptr, nullptr);
}

TrainHistory TrigNet::train(const std::vector<UserExample>& train_set,
                            const std::vector<UserExample>& val_set) {
    if (train_set.empty()) throw std::runtime_error("train: empty dataset");
    if (!params_ready_) init_params();

    SplitMix64 dropout_rng(stable_hash(cfg_.seed, "dropout"));
    AdamHyper hyper;
    hyper.lr = cfg_.lr_graph;

    TrainHistory history;
    double best_val = -1.0;
    int since_best = 0;

    for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (size_t start = 0; start < train_set.size(); start += cfg_.batch_size) {
            const size_t end = std::min(train_set.size(), start + cfg_.batch_size);
            GradMap batch_grads;
            for (const auto& e : store_.entries())
                batch_grads[e.name] = Mat(e.value.rows, e.value.cols);
            for (size_t u = start; u < end; ++u) {
                ForwardOut out;
                NodeId loss = forward_on_tape(out.tape, train_set[u], true, &dropout_rng, &out);
                epoch_loss += out.tape.value(loss).at(0, 0);
                GradMap g = forward_backward(out.tape, loss, store_);
                for (auto& [name, grad] : g) {
                    Mat& acc = batch_grads[name];
                    for (size_t i = 0; i < acc.size(); ++i) acc.data[i] += grad.data[i];
                }
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (auto& [name, grad] : batch_grads)
                for (double& v : grad.data) v *= inv;
            adam_step(store_, batch_grads, hyper);
        }

        EpochStat stat;
        stat.epoch = epoch;
        stat.train_loss = epoch_loss / static_cast<double>(train_set.size());
        if (!val_set.empty()) {
            stat.has_val = true;
            stat.val_avg_f1 = evaluate(val_set).average_f1;
        }
        history.epochs.push_back(stat);

        if (cfg_.patience > 0 && stat.has_val) {
            if (stat.val_avg_f1 > best_val + 1e-12) {
                best_val = stat.val_avg_f1;
                since_best = 0;
            } else if (++since_best >= cfg_.patience) {
                history.stopped_early = true;
                break;
            }
        }
    }
    return history;
}

EvalReport TrigNet::evaluate(const std::vector<UserExample>& dataset) const {
    if (dataset.empty()) throw std::runtime_error("evaluate: empty dataset");
    EvalReport report;
    report.confusions.resize(cfg_.traits);
    for (const auto& user : dataset) {
        ForwardOut out = forward(user);
        if (static_cast<int>(user.labels.size()) != cfg_.traits)
            throw std::runtime_error("evaluate: user '" + user.id + "' lacks labels");
        for (int t = 0; t < cfg_.traits; ++t) {
            const int pred = out.probs.at(t, 1) > out.probs.at(t, 0) ? 1 : 0;
            report.confusions[t].counts[user.labels[t]][pred] += 1;
        }
    }
    double sum = 0.0;
    for (int t = 0; t < cfg_.traits; ++t) {
        report.per_trait_f1.push_back(macro_f1(report.confusions[t]));
        sum += report.per_trait_f1.back();
    }
    report.average_f1 = sum / cfg_.traits;
    return report;
}

std::array<double, 3> TrigNet::layer_weights() const {
    const Mat& logits = store_.get("layer_attn.logits");
    double mx = std::max({logits.at(0, 0), logits.at(0, 1), logits.at(0, 2)});
    std::array<double, 3> w;
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) {
        w[j] = std::exp(logits.at(0, j) - mx);
        sum += w[j];
    }
    for (double& v : w) v /= sum;
    return w;
}

double grad_check_tiny(double eps) {
    // Six words over three categories, three labelled posts. The graph
    // is deliberately dense (shared words, two-category words): a query
    // node whose attention segments all sit on one side of the
    // LeakyReLU kink has mathematically zero gradient for its
    // query-side projections (softmax shift invariance), which a
    // relative-error check cannot distinguish from one-ulp noise. The
    // seed is chosen so every parameter carries a real gradient.
    std::string dic =
        "%\n"
        "1\talpha\tmain\n"
        "2\tbeta\tmain\n"
        "3\tgamma\tmain\n"
        "%\n"
        "apple\t1\n"
        "berry\t1 2\n"
        "cedar\t2\n"
        "delta\t2 3\n"
        "ember\t3\n"
        "frost\t3 1\n";
    std::istringstream in(dic);
    LiwcDictionary dict = parse_dictionary(in);

    ModelConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.dropout = 0.0;
    cfg.seed = 3;
    cfg.category_names = {"alpha", "beta", "gamma"};

    UserExample user;
    user.id = "tiny";
    user.posts = {"apple berry cedar delta", "berry cedar delta ember frost",
                  "apple delta ember frost berry"};
    user.labels = {1, 0, 1, 0};

    // O(1)-scale inputs keep the finite-difference quotients well above
    // double roundoff; the 1/d hash-stub scale would drown the smallest
    // gradient entries in subtraction noise
    std::map<std::string, std::vector<double>> words;
    std::map<std::pair<std::string, int>, std::vector<double>> posts;
    auto fill = [&](const std::string& key) {
        SplitMix64 rng(stable_hash(cfg.seed, "tiny:" + key));
        std::vector<double> v(cfg.d);
        for (double& x : v) x = rng.next_uniform(-0.6, 0.6);
        return v;
    };
    for (const char* w : {"apple", "berry", "cedar", "delta", "ember", "frost", "alpha", "beta", "gamma"})
        words[w] = fill(w);
    for (int p = 1; p <= 3; ++p)
        for (int layer : {10, 11, 12}) {
            const std::string pid = "tiny:p" + std::to_string(p);
            posts[{pid, layer}] = fill(pid + ":" + std::to_string(layer));
        }

    TrigNet model(cfg, dict,
                  EmbeddingProvider::from_table(cfg.d, cfg.seed, std::move(words), std::move(posts)));
    model.init_params();

    LossBuilder builder = [&](Tape& tape, const ParamStore&) -> NodeId {
        return model.forward_loss_on(tape, user);
    };
    return grad_check(builder, model.params(), eps);
}

}  // namespace trignet
