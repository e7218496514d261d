#include "trignet/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace trignet {

TripartiteGraph build_graph(const std::vector<TokenizedPost>& posts, const LiwcDictionary& dict,
                            const CategorySelection& sel, const ModelConfig& cfg,
                            const std::vector<std::string>& post_ids) {
    if (posts.empty()) throw std::runtime_error("empty user");
    if (static_cast<int>(posts.size()) > cfg.max_posts)
        throw std::runtime_error("build_graph: " + std::to_string(posts.size()) +
                                 " posts exceed max_posts=" + std::to_string(cfg.max_posts));
    if (!post_ids.empty() && post_ids.size() != posts.size())
        throw std::runtime_error("build_graph: post id count mismatch");

    TripartiteGraph g;
    for (size_t i = 0; i < posts.size(); ++i)
        g.posts.push_back(post_ids.empty() ? "p" + std::to_string(i + 1) : post_ids[i]);
    g.cats = sel.resolved;

    const int r = g.r();
    const int n = g.n();

    // candidate words: occur in >= 1 post and carry >= 1 selected category
    std::map<std::string, long> freq;  // total corpus occurrences
    std::map<std::string, std::set<int>> word_cats;
    for (const auto& post : posts) {
        for (const auto& tok : post.tokens) {
            auto it = word_cats.find(tok);
            if (it == word_cats.end()) {
                std::set<int> cats = categories_of(dict, tok, sel);
                if (cats.empty()) {
                    word_cats.emplace(tok, std::set<int>{});
                    continue;
                }
                word_cats.emplace(tok, std::move(cats));
            } else if (it->second.empty()) {
                continue;  // known non-LIWC token
            }
            ++freq[tok];
        }
    }

    std::vector<std::string> words;
    for (const auto& [tok, cats] : word_cats)
        if (!cats.empty()) words.push_back(tok);
    std::sort(words.begin(), words.end());

    // node cap: drop the least frequent words first, ties lexicographic
    const long over = static_cast<long>(r) + static_cast<long>(words.size()) + n - cfg.max_nodes;
    if (over > 0) {
        if (static_cast<long>(words.size()) < over)
            throw std::runtime_error("build_graph: r + n alone exceed max_nodes=" +
                                     std::to_string(cfg.max_nodes));
        std::vector<std::string> by_freq = words;
        std::sort(by_freq.begin(), by_freq.end(), [&](const std::string& a, const std::string& b) {
            if (freq[a] != freq[b]) return freq[a] < freq[b];
            return a < b;
        });
        std::set<std::string> dropped(by_freq.begin(), by_freq.begin() + over);
        words.erase(std::remove_if(words.begin(), words.end(),
                                   [&](const std::string& w) { return dropped.count(w) > 0; }),
                    words.end());
    }
    g.words = std::move(words);

    std::map<std::string, int> word_index;
    for (int i = 0; i < g.m(); ++i) word_index[g.words[i]] = i;
    std::map<int, int> cat_index;
    for (int i = 0; i < n; ++i) cat_index[g.cats[i]] = i;

    std::set<std::pair<int, int>> wp, wc;
    for (int p = 0; p < r; ++p)
        for (const auto& tok : posts[p].tokens) {
            auto it = word_index.find(tok);
            if (it != word_index.end()) wp.insert({it->second, p});
        }
    for (const auto& [tok, wi] : word_index)
        for (int cid : word_cats[tok]) wc.insert({wi, cat_index.at(cid)});

    g.wp_edges.assign(wp.begin(), wp.end());
    g.wc_edges.assign(wc.begin(), wc.end());
    return g;
}

GraphStats graph_stats(const TripartiteGraph& g) {
    GraphStats s;
    s.r = g.r();
    s.m = g.m();
    s.n = g.n();
    std::vector<bool> connected(g.r(), false);
    for (const auto& [w, p] : g.wp_edges) connected[p] = true;
    for (bool c : connected)
        if (!c) ++s.disconnected_posts;
    s.liwc_words_per_post = g.r() > 0 ? static_cast<double>(g.wp_edges.size()) / g.r() : 0.0;
    return s;
}

}  // namespace trignet
