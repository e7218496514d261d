#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trignet/config.hpp"
#include "trignet/liwc.hpp"
#include "trignet/text.hpp"

namespace trignet {

/// Per-user tripartite graph: post, word and category node parties with
/// word-post and word-category edges only (no edges inside a party and
/// none between posts and categories).
struct TripartiteGraph {
    std::vector<std::string> posts;  // post ids, r entries
    std::vector<std::string> words;  // unique tokens, m entries, sorted
    std::vector<int> cats;           // selected category ids, n entries, selection order
    std::vector<std::pair<int, int>> wp_edges;  // (word_idx, post_idx)
    std::vector<std::pair<int, int>> wc_edges;  // (word_idx, cat_idx)

    int r() const { return static_cast<int>(posts.size()); }
    int m() const { return static_cast<int>(words.size()); }
    int n() const { return static_cast<int>(cats.size()); }
};

struct GraphStats {
    int r = 0;
    int m = 0;
    int n = 0;
    int disconnected_posts = 0;       // posts with no word edge
    double liwc_words_per_post = 0.0; // |wp_edges| / r
};

/// Builds the tripartite graph for one user's (already scrubbed) posts.
/// Word nodes are the unique tokens that appear in at least one post and
/// carry at least one selected category; every selected category becomes
/// a node even when isolated. If r + m + n would exceed cfg.max_nodes,
/// words are dropped in ascending (corpus frequency, token) order until
/// the cap holds. Zero posts throw "empty user".
TripartiteGraph build_graph(const std::vector<TokenizedPost>& posts, const LiwcDictionary& dict,
                            const CategorySelection& sel, const ModelConfig& cfg,
                            const std::vector<std::string>& post_ids = {});

GraphStats graph_stats(const TripartiteGraph& g);

}  // namespace trignet
