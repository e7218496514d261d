#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "trignet/mat.hpp"

namespace trignet {

struct TokenizedPost {
    std::vector<std::string> tokens;  // lowercase, length already capped
};

/// Lowercases, splits on whitespace/punctuation boundaries, drops the
/// punctuation, truncates to `max_len` tokens (never pads). ASCII
/// letters and digits are token characters; non-ASCII bytes are kept as
/// token characters so UTF-8 words survive intact.
TokenizedPost tokenize(const std::string& text, int max_len);

/// Removes every token contained in `lexicon` (lowercase entries),
/// preserving the order of survivors.
TokenizedPost scrub_label_words(const TokenizedPost& post, const std::set<std::string>& lexicon);

/// Per-post vectors from the last three encoder layers (10, 11, 12).
struct PostLayerVectors {
    std::vector<double> layer10, layer11, layer12;
};

/// Initial-embedding source: either a file-backed table or a
/// deterministic hash stub. Same token always maps to the same vector.
/// Immutable after construction; concurrent reads are safe.
class EmbeddingProvider {
  public:
    /// Hash stub of width `dim`: every token gets a vector whose
    /// components are i.i.d. uniform in [-0.5/dim, 0.5/dim], seeded by a
    /// stable hash of (seed, token).
    static EmbeddingProvider hash_stub(int dim, uint64_t seed);

    /// File-backed table; format (UTF-8 text):
    ///   WORD <count> <dim>
    ///   token v1 ... vdim          (count lines)
    ///   POST <count> <dim>
    ///   post_id layer v1 ... vdim  (count lines, layer in {10,11,12})
    /// Either section may be absent; dims must agree when both appear.
    /// Unknown tokens fall back to greedy piece averaging and then to
    /// the hash stub, so lookups stay total.
    static EmbeddingProvider from_file(const std::string& path, uint64_t seed);

    /// In-memory table with file-backed semantics (tests, tiny setups).
    static EmbeddingProvider from_table(int dim, uint64_t seed,
                                        std::map<std::string, std::vector<double>> words,
                                        std::map<std::pair<std::string, int>, std::vector<double>> posts);

    int dim() const { return dim_; }
    bool file_backed() const { return file_backed_; }

    /// Total: exact hit -> stored vector; miss -> mean of greedy maximal
    /// known substrings (left to right); no known piece -> hash stub.
    std::vector<double> embed_token(const std::string& token) const;

    /// File-backed: stored vectors for (post_id, layer 10..12); a missing
    /// record throws "missing layer <l> for <post_id>". Stub: vectors
    /// seeded by (seed, post_id, layer).
    PostLayerVectors post_layer_vectors(const std::string& post_id) const;

  private:
    std::vector<double> stub_vector(const std::string& key) const;

    int dim_ = 0;
    uint64_t seed_ = 0;
    bool file_backed_ = false;
    bool has_post_section_ = false;
    std::map<std::string, std::vector<double>> words_;
    std::map<std::pair<std::string, int>, std::vector<double>> posts_;
};

}  // namespace trignet
