#include "trignet/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace trignet {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_mat_rows(std::ostream& out, const Mat& m) {
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            if (j) out << ' ';
            out << fmt_double(m.at(i, j));
        }
        out << '\n';
    }
}

void read_mat_rows(std::istream& in, Mat& m, const std::string& name) {
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j)
            if (!(in >> m.at(i, j)))
                throw std::runtime_error("checkpoint: truncated values for " + name);
}

}  // namespace

nlohmann::json config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["d"] = cfg.d;
    j["heads"] = cfg.heads;
    j["layers"] = cfg.layers;
    j["traits"] = cfg.traits;
    j["max_posts"] = cfg.max_posts;
    j["max_post_len"] = cfg.max_post_len;
    j["max_nodes"] = cfg.max_nodes;
    j["dropout"] = cfg.dropout;
    j["lr_graph"] = cfg.lr_graph;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["patience"] = cfg.patience;
    j["seed"] = cfg.seed;
    j["flows"] = to_string(cfg.flows);
    j["tie_mp_params"] = cfg.tie_mp_params;
    j["vanilla_layers"] = cfg.vanilla_layers;
    j["category_names"] = cfg.category_names;
    j["dropped_categories"] = cfg.dropped_categories;
    j["scrub_lexicon"] = cfg.scrub_lexicon;
    return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.d = j.at("d").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.layers = j.at("layers").get<int>();
    cfg.traits = j.at("traits").get<int>();
    cfg.max_posts = j.at("max_posts").get<int>();
    cfg.max_post_len = j.at("max_post_len").get<int>();
    cfg.max_nodes = j.at("max_nodes").get<int>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.lr_graph = j.at("lr_graph").get<double>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.patience = j.at("patience").get<int>();
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.flows = flow_mode_from_string(j.at("flows").get<std::string>());
    cfg.tie_mp_params = j.at("tie_mp_params").get<bool>();
    cfg.vanilla_layers = j.at("vanilla_layers").get<int>();
    cfg.category_names = j.at("category_names").get<std::vector<std::string>>();
    cfg.dropped_categories = j.at("dropped_categories").get<std::vector<std::string>>();
    cfg.scrub_lexicon = j.at("scrub_lexicon").get<std::set<std::string>>();
    cfg.validate();
    return cfg;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["average_macro_f1"] = report.average_f1;
    nlohmann::json traits = nlohmann::json::object();
    for (size_t t = 0; t < report.per_trait_f1.size(); ++t) {
        const std::string name = t < kTraitNames.size() ? kTraitNames[t] : "T" + std::to_string(t);
        const auto& c = report.confusions[t].counts;
        traits[name] = {
            {"macro_f1", report.per_trait_f1[t]},
            {"confusion", {{"tn", c[0][0]}, {"fp", c[0][1]}, {"fn", c[1][0]}, {"tp", c[1][1]}}},
        };
    }
    j["traits"] = traits;
    return j;
}

nlohmann::json history_to_json(const TrainHistory& history) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : history.epochs) {
        nlohmann::json je = {{"epoch", e.epoch}, {"train_loss", e.train_loss}};
        if (e.has_val) je["val_avg_macro_f1"] = e.val_avg_f1;
        epochs.push_back(je);
    }
    return {{"epochs", epochs}, {"stopped_early", history.stopped_early}};
}

void save_checkpoint(const std::string& path, const ParamStore& store, const ModelConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << "TRIGNET-CHECKPOINT 1\n";
    out << "CONFIG " << config_to_json(cfg).dump() << '\n';
    out << "PARAMS " << store.entries().size() << '\n';
    for (const auto& e : store.entries()) {
        out << "PARAM " << e.name << ' ' << e.value.rows << ' ' << e.value.cols << ' ' << e.step
            << '\n';
        write_mat_rows(out, e.value);
        write_mat_rows(out, e.m);
        write_mat_rows(out, e.v);
    }
    out << "END\n";
    if (!out) throw std::runtime_error("error while writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

    std::string line;
    if (!std::getline(in, line) || line != "TRIGNET-CHECKPOINT 1")
        throw std::runtime_error("checkpoint " + path + ": bad magic line");
    if (!std::getline(in, line) || line.rfind("CONFIG ", 0) != 0)
        throw std::runtime_error("checkpoint " + path + ": missing CONFIG line");

    Checkpoint ck;
    ck.config = config_from_json(nlohmann::json::parse(line.substr(7)));

    size_t count = 0;
    {
        std::string tag;
        std::istringstream iss;
        if (!std::getline(in, line)) throw std::runtime_error("checkpoint " + path + ": truncated");
        iss.str(line);
        if (!(iss >> tag >> count) || tag != "PARAMS")
            throw std::runtime_error("checkpoint " + path + ": missing PARAMS line");
    }
    for (size_t i = 0; i < count; ++i) {
        std::string tag, name;
        int rows = 0, cols = 0;
        long step = 0;
        if (!(in >> tag >> name >> rows >> cols >> step) || tag != "PARAM")
            throw std::runtime_error("checkpoint " + path + ": bad PARAM header");
        ck.store.create(name, rows, cols);
        auto& entry = ck.store.entries_mut().back();
        entry.step = step;
        read_mat_rows(in, entry.value, name);
        read_mat_rows(in, entry.m, name);
        read_mat_rows(in, entry.v, name);
    }
    std::string tail;
    if (!(in >> tail) || tail != "END")
        throw std::runtime_error("checkpoint " + path + ": missing END marker");
    return ck;
}

}  // namespace trignet
