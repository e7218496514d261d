#pragma once

#include <string>
#include <vector>

namespace trignet {

/// One labelled user. Trait order is fixed: IE, SN, TF, PJ.
struct UserExample {
    std::string id;
    std::vector<std::string> posts;  // raw text
    std::vector<int> labels;         // one 0/1 label per trait
};

extern const std::vector<std::string> kTraitNames;  // {"IE","SN","TF","PJ"}

/// JSON-lines reader; one user per line:
///   {"id": str, "posts": [str...], "labels": {"IE":0|1,"SN":0|1,"TF":0|1,"PJ":0|1}}
/// Users must have at least one post and all four labels.
std::vector<UserExample> load_dataset(const std::string& path);

}  // namespace trignet
