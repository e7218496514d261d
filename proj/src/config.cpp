#include "trignet/config.hpp"

#include <algorithm>
#include <stdexcept>

#include "trignet/liwc.hpp"

namespace trignet {

std::string to_string(FlowMode mode) {
    switch (mode) {
        case FlowMode::Both: return "both";
        case FlowMode::Flow1Only: return "f1";
        case FlowMode::Flow2Only: return "f2";
        case FlowMode::None: return "none";
    }
    return "both";
}

FlowMode flow_mode_from_string(const std::string& s) {
    if (s == "both") return FlowMode::Both;
    if (s == "f1") return FlowMode::Flow1Only;
    if (s == "f2") return FlowMode::Flow2Only;
    if (s == "none") return FlowMode::None;
    throw std::runtime_error("unknown flow mode '" + s + "' (expected both|f1|f2|none)");
}

void ModelConfig::validate() const {
    if (d <= 0) throw std::runtime_error("config: d must be positive");
    if (heads <= 0 || d % heads != 0)
        throw std::runtime_error("config: heads (" + std::to_string(heads) + ") must divide d (" +
                                 std::to_string(d) + ")");
    if (layers < 1) throw std::runtime_error("config: layers must be >= 1");
    if (traits < 1) throw std::runtime_error("config: traits must be >= 1");
    if (max_posts < 1 || max_post_len < 1) throw std::runtime_error("config: post caps must be >= 1");
    if (max_nodes < 1) throw std::runtime_error("config: max_nodes must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw std::runtime_error("config: dropout must be in [0, 1)");
    if (lr_graph < 0.0) throw std::runtime_error("config: learning rate must be >= 0");
    if (batch_size < 1) throw std::runtime_error("config: batch size must be >= 1");
    if (epochs < 1) throw std::runtime_error("config: epochs must be >= 1");
    if (vanilla_layers < 1) throw std::runtime_error("config: vanilla_layers must be >= 1");
}

std::set<std::string> ModelConfig::default_scrub_lexicon() {
    return {"intj", "intp", "entj", "entp", "infj", "infp", "enfj", "enfp",
            "istj", "isfj", "estj", "esfj", "istp", "isfp", "estp", "esfp"};
}

std::vector<std::string> ModelConfig::effective_category_names() const {
    std::vector<std::string> names =
        category_names.empty() ? default_category_names() : category_names;
    for (const auto& dropped : dropped_categories) {
        std::string needle = dropped;
        std::transform(needle.begin(), needle.end(), needle.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        auto it = std::find(names.begin(), names.end(), needle);
        if (it == names.end())
            throw std::runtime_error("cannot drop category '" + needle + "': not in selection");
        names.erase(it);
    }
    return names;
}

}  // namespace trignet
