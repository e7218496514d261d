#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trignet {

struct FixtureSpec {
    std::string out_dir;
    uint64_t seed = 42;
    int d = 16;            // embedding width written to embeddings.txt
    int train_users = 32;
    int val_users = 16;
    int posts_per_user = 8;
    int post_len = 14;     // every post padded to this length (no length leak)
};

/// Writes a self-contained toy corpus into `out_dir`:
///   toy_liwc.dic   - the 15 standard categories plus a small vocabulary
///   train.jsonl    - planted users: trait t is 1 iff the posts contain
///                    words of that trait's planted category (work,
///                    leisure, money, religion for IE, SN, TF, PJ)
///   valid.jsonl    - same generator, separate stream
///   embeddings.txt - WORD vectors for the vocabulary and category-name
///                    pieces, POST vectors for every generated post
/// Planted-category words belong to no other selected category, so
/// dropping the category removes the trait's signal from the graph
/// entirely.
void gen_fixtures(const FixtureSpec& spec);

/// The planted category per trait index (IE, SN, TF, PJ).
const std::vector<std::string>& planted_categories();

}  // namespace trignet
