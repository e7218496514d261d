#pragma once

#include <set>
#include <string>
#include <vector>

namespace trignet {

enum class FlowMode { Both, Flow1Only, Flow2Only, None };

std::string to_string(FlowMode mode);
FlowMode flow_mode_from_string(const std::string& s);  // both|f1|f2|none

/// Converged hyperparameters and scale caps. `validate()` throws on
/// inconsistent combinations (heads must divide the width, etc.).
struct ModelConfig {
    int d = 96;             // node-state width
    int heads = 12;         // attention heads K; must divide d
    int layers = 1;         // flow GAT layers L
    int traits = 4;         // binary traits T
    int max_posts = 50;     // r cap per user
    int max_post_len = 70;  // s cap per post
    int max_nodes = 500;    // r + m + n cap
    double dropout = 0.2;   // on initial node embeddings, training only
    double lr_graph = 1e-3;
    int batch_size = 32;
    int epochs = 200;
    int patience = 0;       // early stop on validation F1; 0 disables
    uint64_t seed = 42;
    FlowMode flows = FlowMode::Both;
    bool tie_mp_params = false;  // share one parameter set across the five MP sites
    int vanilla_layers = 4;      // stacked baseline depth for cost comparison
    std::vector<std::string> category_names;  // empty -> the 15 defaults
    std::vector<std::string> dropped_categories;  // ablation: removed from selection
    std::set<std::string> scrub_lexicon = default_scrub_lexicon();

    void validate() const;
    int head_dim() const { return d / heads; }

    /// The 16 MBTI type codes; datasets with other label schemes pass
    /// their own lexicon.
    static std::set<std::string> default_scrub_lexicon();
    /// category_names (or the defaults) minus dropped_categories.
    std::vector<std::string> effective_category_names() const;
};

}  // namespace trignet
