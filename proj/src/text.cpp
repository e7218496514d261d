#include "trignet/text.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "trignet/rng.hpp"

namespace trignet {

namespace {

bool is_token_char(unsigned char c) {
    // Non-ASCII bytes count as word characters; ASCII punctuation splits.
    return std::isalnum(c) || c >= 0x80;
}

}  // namespace

TokenizedPost tokenize(const std::string& text, int max_len) {
    TokenizedPost out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && static_cast<int>(out.tokens.size()) < max_len)
            out.tokens.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (is_token_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    if (static_cast<int>(out.tokens.size()) > max_len) out.tokens.resize(max_len);
    return out;
}

TokenizedPost scrub_label_words(const TokenizedPost& post, const std::set<std::string>& lexicon) {
    TokenizedPost out;
    for (const auto& t : post.tokens)
        if (!lexicon.count(t)) out.tokens.push_back(t);
    return out;
}

EmbeddingProvider EmbeddingProvider::hash_stub(int dim, uint64_t seed) {
    if (dim <= 0) throw std::runtime_error("EmbeddingProvider: dim must be positive");
    EmbeddingProvider p;
    p.dim_ = dim;
    p.seed_ = seed;
    p.file_backed_ = false;
    return p;
}

EmbeddingProvider EmbeddingProvider::from_file(const std::string& path, uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);

    EmbeddingProvider p;
    p.seed_ = seed;
    p.file_backed_ = true;

    std::string line;
    int line_no = 0;
    int pending = 0;       // lines left in the current section
    int section = 0;       // 0 none, 1 WORD, 2 POST
    int word_dim = 0, post_dim = 0;

    auto fail = [&](const std::string& what) -> void {
        throw std::runtime_error("embedding file " + path + " line " + std::to_string(line_no) +
                                 ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream iss(line);
        if (pending == 0) {
            std::string kind;
            int count = 0, dim = 0;
            if (!(iss >> kind >> count >> dim) || (kind != "WORD" && kind != "POST"))
                fail("expected 'WORD <count> <dim>' or 'POST <count> <dim>' header");
            if (count < 0 || dim <= 0) fail("bad section header counts");
            section = (kind == "WORD") ? 1 : 2;
            (section == 1 ? word_dim : post_dim) = dim;
            pending = count;
            continue;
        }
        --pending;
        if (section == 1) {
            std::string token;
            if (!(iss >> token)) fail("missing token");
            std::vector<double> vec(word_dim);
            for (int i = 0; i < word_dim; ++i)
                if (!(iss >> vec[i])) fail("token '" + token + "': expected " + std::to_string(word_dim) + " values");
            p.words_[token] = std::move(vec);
        } else {
            std::string post_id;
            int layer = 0;
            if (!(iss >> post_id >> layer)) fail("missing post id or layer");
            if (layer < 10 || layer > 12) fail("layer must be 10, 11 or 12");
            std::vector<double> vec(post_dim);
            for (int i = 0; i < post_dim; ++i)
                if (!(iss >> vec[i])) fail("post '" + post_id + "': expected " + std::to_string(post_dim) + " values");
            p.posts_[{post_id, layer}] = std::move(vec);
            p.has_post_section_ = true;
        }
    }
    if (pending != 0) fail("section ended early (" + std::to_string(pending) + " lines missing)");
    if (word_dim && post_dim && word_dim != post_dim)
        throw std::runtime_error("embedding file " + path + ": WORD dim " + std::to_string(word_dim) +
                                 " != POST dim " + std::to_string(post_dim));
    p.dim_ = word_dim ? word_dim : post_dim;
    if (p.dim_ == 0) throw std::runtime_error("embedding file " + path + ": no sections found");
    return p;
}

EmbeddingProvider EmbeddingProvider::from_table(
    int dim, uint64_t seed, std::map<std::string, std::vector<double>> words,
    std::map<std::pair<std::string, int>, std::vector<double>> posts) {
    if (dim <= 0) throw std::runtime_error("EmbeddingProvider: dim must be positive");
    EmbeddingProvider p;
    p.dim_ = dim;
    p.seed_ = seed;
    p.file_backed_ = true;
    p.has_post_section_ = !posts.empty();
    for (const auto& [token, vec] : words)
        if (static_cast<int>(vec.size()) != dim)
            throw std::runtime_error("EmbeddingProvider: bad vector width for token " + token);
    for (const auto& [key, vec] : posts)
        if (static_cast<int>(vec.size()) != dim)
            throw std::runtime_error("EmbeddingProvider: bad vector width for post " + key.first);
    p.words_ = std::move(words);
    p.posts_ = std::move(posts);
    return p;
}

std::vector<double> EmbeddingProvider::stub_vector(const std::string& key) const {
    SplitMix64 rng(stable_hash(seed_, key));
    std::vector<double> v(dim_);
    const double half = 0.5 / dim_;
    for (double& x : v) x = rng.next_uniform(-half, half);
    return v;
}

std::vector<double> EmbeddingProvider::embed_token(const std::string& token) const {
    if (!file_backed_) return stub_vector(token);

    auto it = words_.find(token);
    if (it != words_.end()) return it->second;

    // greedy maximal-substring split over the known vocabulary
    std::vector<const std::vector<double>*> pieces;
    size_t pos = 0;
    while (pos < token.size()) {
        size_t best_len = 0;
        const std::vector<double>* best = nullptr;
        for (size_t len = token.size() - pos; len >= 1; --len) {
            auto jt = words_.find(token.substr(pos, len));
            if (jt != words_.end()) {
                best_len = len;
                best = &jt->second;
                break;
            }
        }
        if (best) {
            pieces.push_back(best);
            pos += best_len;
        } else {
            ++pos;  // unknown character, skip
        }
    }
    if (pieces.empty()) return stub_vector(token);
    std::vector<double> mean(dim_, 0.0);
    for (const auto* piece : pieces)
        for (int i = 0; i < dim_; ++i) mean[i] += (*piece)[i];
    for (double& x : mean) x /= static_cast<double>(pieces.size());
    return mean;
}

PostLayerVectors EmbeddingProvider::post_layer_vectors(const std::string& post_id) const {
    PostLayerVectors out;
    if (file_backed_ && has_post_section_) {
        for (int layer : {10, 11, 12}) {
            auto it = posts_.find({post_id, layer});
            if (it == posts_.end())
                throw std::runtime_error("missing layer " + std::to_string(layer) + " for " + post_id);
            (layer == 10 ? out.layer10 : layer == 11 ? out.layer11 : out.layer12) = it->second;
        }
        return out;
    }
    if (file_backed_)
        throw std::runtime_error("missing layer 10 for " + post_id);  // no POST section at all
    out.layer10 = stub_vector(post_id + "\x1f" + "10");
    out.layer11 = stub_vector(post_id + "\x1f" + "11");
    out.layer12 = stub_vector(post_id + "\x1f" + "12");
    return out;
}

}  // namespace trignet
