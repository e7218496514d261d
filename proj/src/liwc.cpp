#include "trignet/liwc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace trignet {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw std::runtime_error("dictionary line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    size_t pos = 0;
    try {
        out = std::stoi(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

bool LiwcDictionary::has_category_named(const std::string& lower_name) const {
    for (const auto& [id, cat] : categories)
        if (cat.name == lower_name) return true;
    return false;
}

int LiwcDictionary::category_id(const std::string& lower_name) const {
    for (const auto& [id, cat] : categories)
        if (cat.name == lower_name) return id;
    throw std::runtime_error("category not found: " + lower_name);
}

std::set<int> LiwcDictionary::raw_categories_of(const std::string& token) const {
    std::set<int> out;
    auto it = exact_entries.find(token);
    if (it != exact_entries.end()) out.insert(it->second.begin(), it->second.end());
    // Every prefix of the token is a candidate stem; stem_entries is
    // sorted, so each prefix resolves with one binary search.
    std::string prefix;
    prefix.reserve(token.size());
    for (char c : token) {
        prefix.push_back(c);
        auto lo = std::lower_bound(stem_entries.begin(), stem_entries.end(), prefix,
                                   [](const auto& e, const std::string& p) { return e.first < p; });
        for (auto jt = lo; jt != stem_entries.end() && jt->first == prefix; ++jt)
            out.insert(jt->second.begin(), jt->second.end());
    }
    return out;
}

bool CategorySelection::contains(int id) const {
    return std::find(resolved.begin(), resolved.end(), id) != resolved.end();
}

LiwcDictionary parse_dictionary(std::istream& source) {
    LiwcDictionary dict;
    std::string line;
    int line_no = 0;
    int percent_seen = 0;
    std::set<std::string> names_seen;

    while (std::getline(source, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (line == "%") {
            ++percent_seen;
            if (percent_seen > 2) fail(line_no, "malformed header: extra '%' delimiter");
            continue;
        }
        if (percent_seen == 0) fail(line_no, "malformed header: content before first '%'");

        if (percent_seen == 1) {
            // category header line
            auto fields = split_tabs(line);
            if (fields.size() != 3) fail(line_no, "malformed header: expected id<TAB>name<TAB>main|sub");
            int id = 0;
            if (!parse_int(fields[0], id)) fail(line_no, "malformed header: bad category id '" + fields[0] + "'");
            std::string name = lower(fields[1]);
            if (name.empty()) fail(line_no, "malformed header: empty category name");
            std::string kind = lower(fields[2]);
            if (kind != "main" && kind != "sub") fail(line_no, "malformed header: flag must be main or sub");
            if (dict.categories.count(id)) fail(line_no, "duplicate category id " + std::to_string(id));
            if (names_seen.count(name)) fail(line_no, "duplicate category name '" + name + "'");
            names_seen.insert(name);
            dict.categories[id] = LiwcCategory{id, name, kind == "main"};
            continue;
        }

        // entry line: word_or_stem<TAB>id[ id...]
        auto fields = split_tabs(line);
        if (fields.size() != 2) fail(line_no, "entry: expected word<TAB>ids");
        std::string word = lower(fields[0]);
        if (word.empty()) fail(line_no, "entry: empty word");
        bool is_stem = word.back() == '*';
        if (is_stem) word.pop_back();
        if (word.find('*') != std::string::npos) fail(line_no, "entry: '*' only allowed as final character");
        if (is_stem && word.empty()) fail(line_no, "entry: empty stem");

        std::set<int> ids;
        std::istringstream iss(fields[1]);
        std::string tok;
        while (iss >> tok) {
            int id = 0;
            if (!parse_int(tok, id)) fail(line_no, "entry: bad category id '" + tok + "'");
            if (!dict.categories.count(id)) fail(line_no, "entry references unknown category id " + std::to_string(id));
            ids.insert(id);
        }
        if (ids.empty()) fail(line_no, "entry: no category ids");

        if (is_stem) {
            dict.stem_entries.emplace_back(word, std::move(ids));
        } else {
            dict.exact_entries[word].insert(ids.begin(), ids.end());
        }
    }
    if (percent_seen == 1) fail(line_no, "malformed header: missing closing '%'");
    std::stable_sort(dict.stem_entries.begin(), dict.stem_entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return dict;
}

LiwcDictionary parse_dictionary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dictionary file: " + path);
    return parse_dictionary(in);
}

std::set<int> categories_of(const LiwcDictionary& dict, const std::string& token,
                            const CategorySelection& sel) {
    std::set<int> raw = dict.raw_categories_of(token);
    std::set<int> out;
    for (int id : raw)
        if (sel.contains(id)) out.insert(id);
    return out;
}

CategorySelection select_categories(const LiwcDictionary& dict,
                                    const std::vector<std::string>& names) {
    CategorySelection sel;
    for (const auto& raw : names) {
        std::string name = lower(raw);
        sel.selected.push_back(name);
        sel.resolved.push_back(dict.category_id(name));  // throws "category not found: ..."
    }
    return sel;
}

const std::vector<std::string>& default_category_names() {
    static const std::vector<std::string> names = {
        "function", "affect", "social", "cognitive processes", "perceptual processes",
        "biological processes", "drives", "relativity", "informal language",
        "work", "leisure", "home", "money", "religion", "death",
    };
    return names;
}

CategorySelection default_selection(const LiwcDictionary& dict) {
    return select_categories(dict, default_category_names());
}

}  // namespace trignet
