#include "trignet/fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "trignet/rng.hpp"

namespace trignet {

namespace {

struct Vocab {
    // category name -> exact dictionary entries
    std::map<std::string, std::vector<std::string>> words;
    // (stem, category, surface form used in generated posts)
    std::vector<std::tuple<std::string, std::string, std::string>> stems;
};

Vocab toy_vocab() {
    Vocab v;
    v.words["function"] = {"for", "me", "the", "and", "with", "from"};
    v.words["affect"] = {"good", "love", "happy", "glad", "awful", "scary"};
    v.words["social"] = {"thanks", "friend", "family", "people", "talk"};
    v.words["cognitive processes"] = {"think", "know", "because", "wonder"};
    v.words["perceptual processes"] = {"see", "hear", "look", "sound"};
    v.words["biological processes"] = {"eat", "sleep", "sick", "blood"};
    v.words["drives"] = {"win", "power", "goal", "success"};
    v.words["relativity"] = {"here", "there", "near", "today"};
    v.words["informal language"] = {"lol", "yeah", "okay", "hmm"};
    v.words["home"] = {"kitchen", "garden", "sofa", "curtains"};
    v.words["death"] = {"grave", "coffin", "mourn", "funeral"};
    // planted signal vocabularies; each word carries exactly one category
    v.words["work"] = {"meeting", "deadline", "manager", "resume", "payroll"};
    v.words["leisure"] = {"hobby", "vacation", "picnic", "cinema", "guitar"};
    v.words["money"] = {"budget", "invest", "coins", "savings", "profit"};
    v.words["religion"] = {"temple", "prayer", "sacred", "ritual", "divine"};
    // one wildcard entry per planted category so stem matching carries
    // part of the signal
    v.stems = {{"offic", "work", "office"},
               {"fish", "leisure", "fishing"},
               {"loan", "money", "loans"},
               {"worship", "religion", "worship"}};
    return v;
}

const std::vector<std::string> kMainCategories = {
    "function", "affect", "social", "cognitive processes", "perceptual processes",
    "biological processes", "drives", "relativity", "informal language"};
const std::vector<std::string> kSubCategories = {"work", "leisure", "home",
                                                 "money", "religion", "death"};

std::string fmt(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8g", value);
    return buf;
}

void write_dictionary(const std::string& path, const Vocab& vocab) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::map<std::string, int> ids;
    out << "%\n";
    int next = 1;
    for (const auto& name : kMainCategories) {
        ids[name] = next;
        out << next++ << '\t' << name << "\tmain\n";
    }
    for (const auto& name : kSubCategories) {
        ids[name] = next;
        out << next++ << '\t' << name << "\tsub\n";
    }
    out << "%\n";
    for (const auto& [cat, words] : vocab.words)
        for (const auto& w : words) out << w << '\t' << ids.at(cat) << '\n';
    for (const auto& [stem, cat, surface] : vocab.stems) out << stem << "*\t" << ids.at(cat) << '\n';
}

std::vector<double> seeded_vector(uint64_t seed, const std::string& key, int d, double scale) {
    SplitMix64 rng(stable_hash(seed, key));
    std::vector<double> v(d);
    for (double& x : v) x = rng.next_uniform(-scale, scale);
    return v;
}

struct GeneratedUser {
    std::string id;
    std::vector<std::string> posts;
    std::vector<int> labels;
};

GeneratedUser make_user(const FixtureSpec& spec, const Vocab& vocab, const std::string& id,
                        SplitMix64& rng) {
    GeneratedUser user;
    user.id = id;
    const auto& planted = planted_categories();
    for (size_t t = 0; t < planted.size(); ++t) user.labels.push_back(rng.next_below(2) ? 1 : 0);

    std::vector<std::string> filler;
    for (const auto& [cat, words] : vocab.words) {
        bool is_planted = false;
        for (const auto& p : planted) is_planted |= (cat == p);
        if (!is_planted) filler.insert(filler.end(), words.begin(), words.end());
    }
    std::map<std::string, std::vector<std::string>> signal;
    for (const auto& p : planted) signal[p] = vocab.words.at(p);
    for (const auto& [stem, cat, surface] : vocab.stems) signal[cat].push_back(surface);

    for (int p = 0; p < spec.posts_per_user; ++p) {
        std::vector<std::string> tokens;
        for (size_t t = 0; t < planted.size(); ++t) {
            if (!user.labels[t]) continue;
            const auto& pool = signal.at(planted[t]);
            tokens.push_back(pool[rng.next_below(pool.size())]);
            tokens.push_back(pool[rng.next_below(pool.size())]);
        }
        // pad every post to the same length so label count never leaks
        // through post size
        while (static_cast<int>(tokens.size()) < spec.post_len)
            tokens.push_back(filler[rng.next_below(filler.size())]);
        for (size_t i = tokens.size(); i > 1; --i)
            std::swap(tokens[i - 1], tokens[rng.next_below(i)]);
        std::string text;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (i) text += ' ';
            text += tokens[i];
        }
        text += '.';
        user.posts.push_back(text);
    }
    return user;
}

void write_users(const std::string& path, const std::vector<GeneratedUser>& users) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& u : users) {
        nlohmann::json j;
        j["id"] = u.id;
        j["posts"] = u.posts;
        j["labels"] = {{"IE", u.labels[0]}, {"SN", u.labels[1]}, {"TF", u.labels[2]}, {"PJ", u.labels[3]}};
        out << j.dump() << '\n';
    }
}

}  // namespace

const std::vector<std::string>& planted_categories() {
    static const std::vector<std::string> cats = {"work", "leisure", "money", "religion"};
    return cats;
}

void gen_fixtures(const FixtureSpec& spec) {
    namespace fs = std::filesystem;
    if (spec.d <= 0 || spec.train_users <= 0 || spec.val_users < 0 || spec.posts_per_user <= 0)
        throw std::runtime_error("gen_fixtures: bad spec");
    fs::create_directories(spec.out_dir);
    const Vocab vocab = toy_vocab();

    write_dictionary(spec.out_dir + "/toy_liwc.dic", vocab);

    SplitMix64 train_rng(stable_hash(spec.seed, "fixture:train"));
    SplitMix64 val_rng(stable_hash(spec.seed, "fixture:valid"));
    std::vector<GeneratedUser> train, valid;
    for (int i = 0; i < spec.train_users; ++i)
        train.push_back(make_user(spec, vocab, "u" + std::to_string(i + 1), train_rng));
    for (int i = 0; i < spec.val_users; ++i)
        valid.push_back(make_user(spec, vocab, "v" + std::to_string(i + 1), val_rng));
    write_users(spec.out_dir + "/train.jsonl", train);
    write_users(spec.out_dir + "/valid.jsonl", valid);

    // embeddings: full vocabulary, stem surface forms, and the words of
    // multi-word category names (the provider averages those pieces when
    // embedding category nodes)
    std::vector<std::string> tokens;
    for (const auto& [cat, words] : vocab.words) tokens.insert(tokens.end(), words.begin(), words.end());
    for (const auto& [stem, cat, surface] : vocab.stems) tokens.push_back(surface);
    for (const auto& group : {kMainCategories, kSubCategories})
        for (const auto& name : group) {
            std::string piece;
            for (char c : name) {
                if (c == ' ') {
                    if (!piece.empty()) tokens.push_back(piece);
                    piece.clear();
                } else {
                    piece.push_back(c);
                }
            }
            if (!piece.empty()) tokens.push_back(piece);
        }
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

    // words of one planted category share a strong direction (one block
    // of dimensions per category), so the trait signal reaches the post
    // states as a consistent, linearly separable shift; everything else
    // gets small i.i.d. vectors
    std::map<std::string, int> planted_block;
    {
        const auto& planted = planted_categories();
        std::map<std::string, std::vector<std::string>> signal_words;
        for (const auto& p : planted) signal_words[p] = vocab.words.at(p);
        for (const auto& [stem, cat, surface] : vocab.stems) signal_words[cat].push_back(surface);
        for (size_t t = 0; t < planted.size(); ++t)
            for (const auto& w : signal_words.at(planted[t]))
                planted_block[w] = static_cast<int>(t);
    }
    const int block_width = std::max(1, spec.d / 4);

    const std::string emb_path = spec.out_dir + "/embeddings.txt";
    std::ofstream out(emb_path);
    if (!out) throw std::runtime_error("cannot write " + emb_path);
    out << "WORD " << tokens.size() << ' ' << spec.d << '\n';
    for (const auto& tok : tokens) {
        auto vec = seeded_vector(spec.seed, "emb:" + tok, spec.d, 0.3);
        auto block = planted_block.find(tok);
        if (block != planted_block.end()) {
            const int lo = (block->second * block_width) % spec.d;
            for (int j = 0; j < block_width; ++j) vec[(lo + j) % spec.d] += 1.0;
        }
        out << tok;
        for (double x : vec) out << ' ' << fmt(x);
        out << '\n';
    }
    long post_lines = 0;
    for (const auto* set : {&train, &valid}) post_lines += 3L * spec.posts_per_user * set->size();
    out << "POST " << post_lines << ' ' << spec.d << '\n';
    for (const auto* set : {&train, &valid})
        for (const auto& u : *set)
            for (int p = 0; p < spec.posts_per_user; ++p)
                for (int layer : {10, 11, 12}) {
                    const std::string pid = u.id + ":p" + std::to_string(p + 1);
                    auto vec = seeded_vector(spec.seed, "post:" + pid + ":" + std::to_string(layer),
                                             spec.d, 0.05);
                    out << pid << ' ' << layer;
                    for (double x : vec) out << ' ' << fmt(x);
                    out << '\n';
                }
}

}  // namespace trignet
