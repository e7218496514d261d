#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "trignet/rng.hpp"
#include "trignet/text.hpp"

using namespace trignet;

TEST_CASE("tokenize: lowercase, punctuation split, empty input") {
    CHECK(tokenize("", 70).tokens.empty());
    CHECK(tokenize("Love it! Thanks for sharing!", 70).tokens ==
          std::vector<std::string>{"love", "it", "thanks", "for", "sharing"});
    CHECK(tokenize("a,b;;c--d", 70).tokens == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("tokenize truncates to the post length cap and never pads") {
    std::string text;
    for (int i = 0; i < 80; ++i) text += "w" + std::to_string(i) + " ";
    auto tokens = tokenize(text, 70).tokens;
    CHECK(tokens.size() == 70);
    CHECK(tokens.front() == "w0");
    CHECK(tokens.back() == "w69");
}

TEST_CASE("tokenizer determinism and length bound over random byte strings") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const int len = static_cast<int>(rng.next_below(200));
        for (int i = 0; i < len; ++i) text.push_back(static_cast<char>(rng.next_below(256)));
        auto a = tokenize(text, 70);
        auto b = tokenize(text, 70);
        CHECK(a.tokens == b.tokens);
        CHECK(a.tokens.size() <= 70);
    }
}

TEST_CASE("scrub removes lexicon tokens and is idempotent") {
    TokenizedPost post{{"i", "am", "intj"}};
    std::set<std::string> lexicon{"intj"};
    CHECK(scrub_label_words(post, lexicon).tokens == std::vector<std::string>{"i", "am"});
    CHECK(scrub_label_words(post, {}).tokens == post.tokens);
    CHECK(scrub_label_words(TokenizedPost{{"intj", "intj"}}, lexicon).tokens.empty());

    SplitMix64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        TokenizedPost p;
        std::set<std::string> lex;
        for (int i = 0; i < 12; ++i) {
            std::string w(1, static_cast<char>('a' + rng.next_below(6)));
            p.tokens.push_back(w);
            if (rng.next_below(3) == 0) lex.insert(w);
        }
        auto once = scrub_label_words(p, lex);
        auto twice = scrub_label_words(once, lex);
        CHECK(once.tokens == twice.tokens);
    }
}

TEST_CASE("hash stub embeddings: deterministic, total, correctly scaled") {
    auto p = EmbeddingProvider::hash_stub(16, 42);
    CHECK(p.embed_token("anything") == p.embed_token("anything"));
    CHECK(p.embed_token("a") != p.embed_token("b"));

    SplitMix64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::string token;
        for (int i = 0; i < static_cast<int>(rng.next_below(20)); ++i)
            token.push_back(static_cast<char>(rng.next_below(256)));
        auto v = p.embed_token(token);
        REQUIRE(v.size() == 16);
        for (double x : v) {
            CHECK(std::isfinite(x));
            CHECK(std::fabs(x) <= 0.5 / 16);
        }
    }
}

TEST_CASE("file-backed embeddings: exact hit, piece averaging, stub fallback") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "trignet_emb_test.txt";
    {
        std::ofstream out(path);
        out << "WORD 3 4\n"
            << "love 1 2 3 4\n"
            << "shar 0.5 0.5 0.5 0.5\n"
            << "ing -0.5 0.5 -0.5 0.5\n"
            << "POST 3 4\n"
            << "u1:p3 10 1 0 0 0\n"
            << "u1:p3 12 0 0 1 0\n"
            << "u1:p1 10 9 9 9 9\n";
    }
    auto p = EmbeddingProvider::from_file(path.string(), 7);
    CHECK(p.dim() == 4);
    CHECK(p.embed_token("love") == std::vector<double>{1, 2, 3, 4});
    // unknown "sharing" splits greedily into shar + ing and averages
    CHECK(p.embed_token("sharing") == std::vector<double>{0, 0.5, 0, 0.5});
    // nothing known: falls back to the deterministic stub
    auto stub = p.embed_token("zzzz");
    CHECK(stub == p.embed_token("zzzz"));
    for (double x : stub) CHECK(std::fabs(x) <= 0.5 / 4);

    CHECK_THROWS_WITH_AS(p.post_layer_vectors("u1:p3"), doctest::Contains("missing layer 11 for u1:p3"),
                         std::runtime_error);
    fs::remove(path);
}

TEST_CASE("file-backed post vectors load in layer order") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "trignet_emb_test2.txt";
    {
        std::ofstream out(path);
        out << "POST 3 2\n"
            << "u:p1 11 11 11\n"
            << "u:p1 10 10 10\n"
            << "u:p1 12 12 12\n";
    }
    auto p = EmbeddingProvider::from_file(path.string(), 7);
    auto plv = p.post_layer_vectors("u:p1");
    CHECK(plv.layer10 == std::vector<double>{10, 10});
    CHECK(plv.layer11 == std::vector<double>{11, 11});
    CHECK(plv.layer12 == std::vector<double>{12, 12});
    fs::remove(path);
}

TEST_CASE("stub post vectors: three deterministic layers per post id") {
    auto p = EmbeddingProvider::hash_stub(8, 1);
    auto a = p.post_layer_vectors("u1:p1");
    auto b = p.post_layer_vectors("u1:p1");
    CHECK(a.layer10 == b.layer10);
    CHECK(a.layer11 == b.layer11);
    CHECK(a.layer12 == b.layer12);
    CHECK(a.layer10 != a.layer11);
    CHECK(p.post_layer_vectors("u1:p2").layer10 != a.layer10);
}
