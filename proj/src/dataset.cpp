#include "trignet/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace trignet {

const std::vector<std::string> kTraitNames = {"IE", "SN", "TF", "PJ"};

std::vector<UserExample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    std::vector<UserExample> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("dataset " + path + " line " + std::to_string(line_no) +
                                     ": invalid JSON (" + e.what() + ")");
        }
        auto fail = [&](const std::string& what) -> void {
            throw std::runtime_error("dataset " + path + " line " + std::to_string(line_no) + ": " + what);
        };
        UserExample u;
        if (!j.contains("id") || !j["id"].is_string()) fail("missing string field 'id'");
        u.id = j["id"].get<std::string>();
        if (!j.contains("posts") || !j["posts"].is_array() || j["posts"].empty())
            fail("user '" + u.id + "' needs a non-empty 'posts' array");
        for (const auto& p : j["posts"]) {
            if (!p.is_string()) fail("posts must be strings");
            u.posts.push_back(p.get<std::string>());
        }
        if (!j.contains("labels") || !j["labels"].is_object()) fail("missing 'labels' object");
        for (const auto& trait : kTraitNames) {
            if (!j["labels"].contains(trait)) fail("missing label '" + trait + "'");
            int v = j["labels"][trait].get<int>();
            if (v != 0 && v != 1) fail("label '" + trait + "' must be 0 or 1");
            u.labels.push_back(v);
        }
        out.push_back(std::move(u));
    }
    return out;
}

}  // namespace trignet
