#pragma once

#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace trignet {

struct LiwcCategory {
    int id = 0;
    std::string name;     // lowercase
    bool is_main = false; // one of the main categories vs. a subcategory
};

/// A LIWC-style lexicon: a category taxonomy plus word entries. Entries
/// are either exact tokens or wildcard stems ("hungr*" matches any token
/// with that prefix). Immutable after parsing; safe for concurrent reads.
class LiwcDictionary {
  public:
    std::map<int, LiwcCategory> categories;
    std::map<std::string, std::set<int>> exact_entries;
    /// (stem, category ids), stem stored without the trailing '*',
    /// sorted by stem so prefix lookups can binary search.
    std::vector<std::pair<std::string, std::set<int>>> stem_entries;

    bool has_category_named(const std::string& lower_name) const;
    int category_id(const std::string& lower_name) const;  // throws if absent

    /// Union of the exact entry and every matching stem entry for a
    /// lowercase token. Total: unknown tokens yield the empty set.
    std::set<int> raw_categories_of(const std::string& token) const;
};

/// Ordered category subset; order defines the category-node index.
struct CategorySelection {
    std::vector<std::string> selected;  // lowercase names
    std::vector<int> resolved;          // ids, same order

    bool contains(int id) const;
    size_t size() const { return resolved.size(); }
};

/// Parses the two-section percent-delimited dictionary format:
///   %
///   id<TAB>name<TAB>main|sub        (category header lines)
///   %
///   word_or_stem<TAB>id[ id...]     (entry lines, '*' only final)
/// Malformed input throws with the offending line number.
LiwcDictionary parse_dictionary(std::istream& source);
LiwcDictionary parse_dictionary_file(const std::string& path);

/// Categories of `token` (already lowercase) restricted to `sel`.
std::set<int> categories_of(const LiwcDictionary& dict, const std::string& token,
                            const CategorySelection& sel);

/// Resolves `names` against the dictionary, preserving order. A missing
/// name throws "category not found: <name>".
CategorySelection select_categories(const LiwcDictionary& dict,
                                    const std::vector<std::string>& names);

/// The nine main categories plus the six personal-concern subcategories.
const std::vector<std::string>& default_category_names();

/// select_categories over the 15 default names.
CategorySelection default_selection(const LiwcDictionary& dict);

}  // namespace trignet
