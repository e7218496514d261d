#pragma once

#include <array>
#include <optional>
#include <vector>

#include "trignet/config.hpp"
#include "trignet/dataset.hpp"
#include "trignet/flow_gat.hpp"
#include "trignet/graph.hpp"
#include "trignet/grad_check.hpp"
#include "trignet/liwc.hpp"
#include "trignet/param_store.hpp"
#include "trignet/rng.hpp"
#include "trignet/tape.hpp"
#include "trignet/text.hpp"

namespace trignet {

/// Collapses the three per-layer post vectors into r x d initial post
/// states with softmax layer weights; differentiable w.r.t. `logits`
/// (a 1 x 3 node).
NodeId init_post_nodes(Tape& tape, const std::vector<PostLayerVectors>& layers, NodeId logits,
                       int d);

/// Plain (non-tape) negative log likelihood over T independent 2-way
/// traits, probabilities clamped at 1e-12 before the log.
double nll_loss(const Mat& probs, const std::vector<int>& labels);

struct TraitConfusion {
    long counts[2][2] = {{0, 0}, {0, 0}};  // [true][pred]
};

/// Unweighted mean of the two per-class F1 scores; a class with neither
/// true nor predicted instances contributes 0.
double macro_f1(const TraitConfusion& c);

struct EvalReport {
    std::vector<double> per_trait_f1;
    double average_f1 = 0.0;
    std::vector<TraitConfusion> confusions;
};

struct EpochStat {
    int epoch = 0;
    double train_loss = 0.0;
    bool has_val = false;
    double val_avg_f1 = 0.0;
};

struct TrainHistory {
    std::vector<EpochStat> epochs;
    bool stopped_early = false;
};

struct ForwardOut {
    Tape tape;
    Mat probs;              // traits x 2
    NodeId loss = -1;       // -1 when the example carries no labels
    NodeId layer_weights = -1;
    GraphStats stats;
};

/// End-to-end model: tokenize posts, scrub label words, build the
/// per-user tripartite graph, initialize node states (layer-attention
/// post vectors, token embeddings for words, name embeddings for
/// categories), run L flow GAT layers, mean-pool the post states and
/// classify each trait with its own 2-way softmax head.
class TrigNet {
  public:
    TrigNet(ModelConfig cfg, LiwcDictionary dict, EmbeddingProvider provider);

    /// Fresh Glorot/zero-initialized parameters from cfg.seed.
    void init_params();

    /// Adopts a parameter store loaded from a checkpoint. Validates that
    /// the expected parameter names exist with matching shapes.
    void load_params(ParamStore store);

    /// Inference is deterministic; training mode applies dropout to the
    /// initial node embeddings using `dropout_rng`.
    ForwardOut forward(const UserExample& user, bool training = false,
                       SplitMix64* dropout_rng = nullptr) const;

    /// Inference-mode forward built on a caller-owned tape; returns the
    /// scalar loss node (gradient checking rebuilds this repeatedly).
    NodeId forward_loss_on(Tape& tape, const UserExample& user) const;

    /// Mini-batch training with per-batch gradient accumulation and one
    /// Adam step per batch. Early-stops on validation average Macro-F1
    /// when cfg.patience > 0 and a validation split is given. Fully
    /// deterministic for a fixed seed.
    TrainHistory train(const std::vector<UserExample>& train_set,
                       const std::vector<UserExample>& val_set);

    EvalReport evaluate(const std::vector<UserExample>& dataset) const;

    /// Softmax of the layer-attention logits, emitted for reporting.
    std::array<double, 3> layer_weights() const;

    const ModelConfig& config() const { return cfg_; }
    const CategorySelection& selection() const { return sel_; }
    const LiwcDictionary& dictionary() const { return dict_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    /// Graph for one user after tokenize + scrub, as the forward sees it.
    TripartiteGraph user_graph(const UserExample& user) const;

  private:
    NodeId forward_on_tape(Tape& tape, const UserExample& user, bool training,
                           SplitMix64* dropout_rng, ForwardOut* out) const;

    ModelConfig cfg_;
    LiwcDictionary dict_;
    CategorySelection sel_;
    EmbeddingProvider provider_;
    ParamStore store_;
    std::vector<FgatParams> layer_params_;
    bool params_ready_ = false;
};

/// End-to-end gradient check on a fixed tiny setup (3 posts, 6 words,
/// 3 categories, d=8, K=2, L=1, dropout off); returns the max relative
/// error against central finite differences with the given step.
double grad_check_tiny(double eps = 1e-5);

}  // namespace trignet
