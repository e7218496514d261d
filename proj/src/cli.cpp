#include "trignet/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trignet/cost.hpp"
#include "trignet/fixtures.hpp"
#include "trignet/model.hpp"
#include "trignet/serialize.hpp"

namespace trignet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliOptions {
    std::string dataset, val_dataset, dict, embeddings, checkpoint, out;
    ModelConfig cfg;
    std::vector<std::string> drop_categories;
    std::vector<std::string> scrub_words;
    bool export_graph = false;
    std::string flows = "both";
    // profile
    long r = 50, n = 15;
    long e_wp = -1, e_wc = -1;
    double words_per_post = 20.45;
    int l_flow = 1, l_vanilla = 4;
    bool emit_json = false;
    // gradcheck
    bool tiny = false;
    double eps = 1e-5;
    double threshold = 1e-4;
    // fixtures
    int train_users = 32, val_users = 16, posts_per_user = 8, post_len = 14;
};

void add_model_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--seed", opt.cfg.seed, "random seed");
    cmd->add_option("--d", opt.cfg.d, "node state width");
    cmd->add_option("--K", opt.cfg.heads, "attention heads");
    cmd->add_option("--L", opt.cfg.layers, "flow GAT layers");
    cmd->add_option("--max-posts", opt.cfg.max_posts, "posts kept per user");
    cmd->add_option("--max-post-len", opt.cfg.max_post_len, "tokens kept per post");
    cmd->add_option("--max-nodes", opt.cfg.max_nodes, "node cap r+m+n");
    cmd->add_option("--dropout", opt.cfg.dropout, "dropout on initial node embeddings");
    cmd->add_option("--lr", opt.cfg.lr_graph, "Adam learning rate");
    cmd->add_option("--epochs", opt.cfg.epochs, "training epochs");
    cmd->add_option("--batch", opt.cfg.batch_size, "users per mini-batch");
    cmd->add_option("--patience", opt.cfg.patience, "early-stop patience (0 = off)");
    cmd->add_option("--flows", opt.flows, "message flows: both|f1|f2|none");
    cmd->add_flag("--tie-mp-params", opt.cfg.tie_mp_params, "share one MP parameter set");
    cmd->add_option("--drop-category", opt.drop_categories, "remove a category from the selection")
        ->take_all();
    cmd->add_option("--scrub-word", opt.scrub_words, "add a word to the scrub lexicon")->take_all();
}

void finalize_config(CliOptions& opt) {
    opt.cfg.flows = flow_mode_from_string(opt.flows);
    opt.cfg.dropped_categories = opt.drop_categories;
    for (const auto& w : opt.scrub_words) opt.cfg.scrub_lexicon.insert(w);
    opt.cfg.validate();
}

void require_path(const std::string& value, const std::string& flag) {
    if (value.empty()) throw CLI::ValidationError("missing " + flag);
    if (!fs::exists(value)) throw CLI::ValidationError(flag + ": no such file " + value);
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

EmbeddingProvider make_provider(const CliOptions& opt) {
    if (!opt.embeddings.empty()) {
        require_path(opt.embeddings, "--embeddings");
        return EmbeddingProvider::from_file(opt.embeddings, opt.cfg.seed);
    }
    return EmbeddingProvider::hash_stub(opt.cfg.d, opt.cfg.seed);
}

int run_build_graph(CliOptions& opt) {
    require_path(opt.dataset, "--dataset");
    require_path(opt.dict, "--dict");
    if (opt.out.empty()) throw CLI::ValidationError("missing --out");
    finalize_config(opt);

    LiwcDictionary dict = parse_dictionary_file(opt.dict);
    auto dataset = load_dataset(opt.dataset);
    TrigNet model(opt.cfg, dict, EmbeddingProvider::hash_stub(opt.cfg.d, opt.cfg.seed));

    json users = json::array();
    for (const auto& user : dataset) {
        TripartiteGraph g = model.user_graph(user);
        GraphStats s = graph_stats(g);
        json ju = {{"user", user.id},
                   {"stats",
                    {{"r", s.r},
                     {"m", s.m},
                     {"n", s.n},
                     {"disconnected_posts", s.disconnected_posts},
                     {"liwc_words_per_post", s.liwc_words_per_post}}}};
        if (opt.export_graph) {
            json cats = json::array();
            for (int cid : g.cats)
                cats.push_back({{"id", cid}, {"name", dict.categories.at(cid).name}});
            json wp = json::array(), wc = json::array();
            for (const auto& [w, p] : g.wp_edges) wp.push_back({w, p});
            for (const auto& [w, c] : g.wc_edges) wc.push_back({w, c});
            ju["graph"] = {{"posts", g.posts},
                           {"words", g.words},
                           {"categories", cats},
                           {"word_post_edges", wp},
                           {"word_category_edges", wc}};
        }
        users.push_back(ju);
    }
    fs::create_directories(opt.out);
    json out = {{"config", config_to_json(opt.cfg)}, {"users", users}};
    write_text(opt.out + "/graphs.json", out.dump(2) + "\n");
    std::cout << "wrote " << opt.out << "/graphs.json (" << users.size() << " users)\n";
    return 0;
}

int run_train(CliOptions& opt) {
    require_path(opt.dataset, "--dataset");
    require_path(opt.dict, "--dict");
    if (opt.out.empty()) throw CLI::ValidationError("missing --out");
    finalize_config(opt);

    LiwcDictionary dict = parse_dictionary_file(opt.dict);
    auto train_set = load_dataset(opt.dataset);
    std::vector<UserExample> val_set;
    if (!opt.val_dataset.empty()) {
        require_path(opt.val_dataset, "--val-dataset");
        val_set = load_dataset(opt.val_dataset);
    }

    TrigNet model(opt.cfg, dict, make_provider(opt));
    model.init_params();
    TrainHistory history = model.train(train_set, val_set);

    fs::create_directories(opt.out);
    save_checkpoint(opt.out + "/checkpoint.txt", model.params(), opt.cfg);
    json jh = {{"config", config_to_json(opt.cfg)}, {"history", history_to_json(history)}};
    write_text(opt.out + "/history.json", jh.dump(2) + "\n");
    auto w = model.layer_weights();
    json jw = {{"config", config_to_json(opt.cfg)},
               {"layer_weights", {{"layer10", w[0]}, {"layer11", w[1]}, {"layer12", w[2]}}}};
    write_text(opt.out + "/layer_weights.json", jw.dump(2) + "\n");

    const auto& last = history.epochs.back();
    std::cout << "trained " << history.epochs.size() << " epochs, final loss " << last.train_loss;
    if (last.has_val) std::cout << ", val avg Macro-F1 " << last.val_avg_f1;
    std::cout << "\nartifacts in " << opt.out << "\n";
    return 0;
}

int run_eval(CliOptions& opt) {
    if (opt.checkpoint.empty()) throw CLI::ValidationError("missing --checkpoint");
    require_path(opt.checkpoint, "--checkpoint");
    require_path(opt.dataset, "--dataset");
    require_path(opt.dict, "--dict");

    Checkpoint ck = load_checkpoint(opt.checkpoint);
    opt.cfg = ck.config;  // evaluation runs under the training config
    LiwcDictionary dict = parse_dictionary_file(opt.dict);
    TrigNet model(opt.cfg, dict, make_provider(opt));
    model.load_params(std::move(ck.store));

    EvalReport report = model.evaluate(load_dataset(opt.dataset));
    json out = {{"config", config_to_json(opt.cfg)}, {"report", eval_report_to_json(report)}};
    if (!opt.out.empty()) {
        fs::create_directories(opt.out);
        write_text(opt.out + "/eval.json", out.dump(2) + "\n");
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_profile(CliOptions& opt) {
    opt.cfg.validate();
    GraphShape shape;
    if (opt.e_wp >= 0 || opt.e_wc >= 0) {
        shape.r = opt.r;
        shape.n = opt.n;
        shape.m = opt.cfg.max_nodes - opt.r - opt.n;
        shape.e_wp = opt.e_wp >= 0 ? opt.e_wp : std::llround(opt.r * opt.words_per_post);
        shape.e_wc = opt.e_wc >= 0 ? opt.e_wc : shape.m;
        shape.d = opt.cfg.d;
        shape.heads = opt.cfg.heads;
    } else {
        shape = reference_profile_shape(opt.r, opt.n, opt.cfg.max_nodes, opt.words_per_post, opt.cfg.d,
                                  opt.cfg.heads);
    }
    if (shape.m < 0) throw CLI::ValidationError("--max-nodes too small for --r plus --n");

    CostComparison cmp = compare_costs(shape, opt.l_flow, opt.l_vanilla, opt.cfg.tie_mp_params);

    json out = {{"config", config_to_json(opt.cfg)},
                {"shape",
                 {{"r", shape.r},
                  {"m", shape.m},
                  {"n", shape.n},
                  {"e_wp", shape.e_wp},
                  {"e_wc", shape.e_wc},
                  {"d", shape.d},
                  {"heads", shape.heads}}},
                {"flops_flow", cmp.flow.flops},
                {"flops_vanilla", cmp.vanilla.flops},
                {"peak_mem_flow_bytes", cmp.flow.peak_mem_bytes},
                {"peak_mem_vanilla_bytes", cmp.vanilla.peak_mem_bytes},
                {"train_mem_flow_bytes", cmp.flow.train_mem_bytes},
                {"train_mem_vanilla_bytes", cmp.vanilla.train_mem_bytes},
                {"params_flow", cmp.flow.param_count},
                {"params_vanilla", cmp.vanilla.param_count},
                {"layers_flow", cmp.flow.layers},
                {"layers_vanilla", cmp.vanilla.layers},
                {"flop_reduction", cmp.flop_reduction},
                {"mem_reduction", cmp.mem_reduction}};

    if (opt.emit_json) {
        std::cout << out.dump(2) << "\n";
    } else {
        auto row = [](const CostReport& r) {
            std::printf("%-8s %7d %16llu %16llu %14llu\n", r.variant.c_str(), r.layers,
                        static_cast<unsigned long long>(r.flops),
                        static_cast<unsigned long long>(r.peak_mem_bytes),
                        static_cast<unsigned long long>(r.param_count));
        };
        std::printf("shape: r=%ld m=%ld n=%ld e_wp=%ld e_wc=%ld d=%d K=%d\n", shape.r, shape.m,
                    shape.n, shape.e_wp, shape.e_wc, shape.d, shape.heads);
        std::printf("%-8s %7s %16s %16s %14s\n", "variant", "layers", "flops", "peak_mem_B", "params");
        row(cmp.flow);
        row(cmp.vanilla);
        std::printf("reduction: flops %.1f%%, memory %.1f%%\n", 100.0 * cmp.flop_reduction,
                    100.0 * cmp.mem_reduction);
    }
    if (!opt.out.empty()) {
        fs::create_directories(opt.out);
        write_text(opt.out + "/profile.json", out.dump(2) + "\n");
    }
    return 0;
}

int run_gradcheck(CliOptions& opt) {
    if (!opt.tiny)
        throw CLI::ValidationError("gradcheck currently supports the --tiny configuration only");
    const double err = grad_check_tiny(opt.eps);
    std::printf("max relative error: %.3e (threshold %.1e)\n", err, opt.threshold);
    return err < opt.threshold ? 0 : 1;
}

int run_gen_fixtures(CliOptions& opt) {
    if (opt.out.empty()) throw CLI::ValidationError("missing --out");
    FixtureSpec spec;
    spec.out_dir = opt.out;
    spec.seed = opt.cfg.seed;
    spec.d = opt.cfg.d;
    spec.train_users = opt.train_users;
    spec.val_users = opt.val_users;
    spec.posts_per_user = opt.posts_per_user;
    spec.post_len = opt.post_len;
    gen_fixtures(spec);
    std::cout << "fixtures in " << opt.out << ": toy_liwc.dic train.jsonl valid.jsonl embeddings.txt\n";
    return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"TrigNet: tripartite-graph personality detection at desk scale"};
    app.require_subcommand(1);

    CliOptions opt;
    opt.cfg.d = 96;  // stub-friendly default; acceptance runs pass --d explicitly

    auto add_paths = [&](CLI::App* cmd) {
        cmd->add_option("--dataset", opt.dataset, "JSONL dataset");
        cmd->add_option("--val-dataset", opt.val_dataset, "JSONL validation dataset");
        cmd->add_option("--dict", opt.dict, "LIWC-style dictionary file");
        cmd->add_option("--embeddings", opt.embeddings, "embedding table (omit for hash stub)");
        cmd->add_option("--checkpoint", opt.checkpoint, "checkpoint file");
        cmd->add_option("--out", opt.out, "output directory");
    };

    CLI::App* build = app.add_subcommand("build-graph", "build per-user graphs and stats");
    add_paths(build);
    add_model_flags(build, opt);
    build->add_flag("--export-graph", opt.export_graph, "include node and edge arrays");

    CLI::App* train = app.add_subcommand("train", "train and write checkpoint + history");
    add_paths(train);
    add_model_flags(train, opt);

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_paths(eval);

    CLI::App* profile = app.add_subcommand("profile", "flow vs vanilla GAT cost comparison");
    add_paths(profile);
    add_model_flags(profile, opt);
    profile->add_option("--r", opt.r, "post nodes");
    profile->add_option("--n", opt.n, "category nodes");
    profile->add_option("--e-wp", opt.e_wp, "word-post edges (default r * words-per-post)");
    profile->add_option("--e-wc", opt.e_wc, "word-category edges (default m)");
    profile->add_option("--words-per-post", opt.words_per_post, "mean dictionary words per post");
    profile->add_option("--l-flow", opt.l_flow, "flow GAT layers");
    profile->add_option("--l-vanilla", opt.l_vanilla, "vanilla GAT layers");
    profile->add_flag("--json", opt.emit_json, "print JSON instead of the table");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
    gradcheck->add_flag("--tiny", opt.tiny, "fixed tiny end-to-end configuration");
    gradcheck->add_option("--eps", opt.eps, "finite-difference step");
    gradcheck->add_option("--threshold", opt.threshold, "max relative error to accept");

    CLI::App* fixtures = app.add_subcommand("gen-fixtures", "write the toy corpus");
    add_paths(fixtures);
    fixtures->add_option("--seed", opt.cfg.seed, "random seed");
    fixtures->add_option("--d", opt.cfg.d, "embedding width");
    fixtures->add_option("--train-users", opt.train_users, "training users");
    fixtures->add_option("--val-users", opt.val_users, "validation users");
    fixtures->add_option("--posts-per-user", opt.posts_per_user, "posts per user");
    fixtures->add_option("--post-len", opt.post_len, "tokens per post");

    std::vector<const char*> argv;
    argv.push_back("trignet");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (build->parsed()) return run_build_graph(opt);
        if (train->parsed()) return run_train(opt);
        if (eval->parsed()) return run_eval(opt);
        if (profile->parsed()) return run_profile(opt);
        if (gradcheck->parsed()) return run_gradcheck(opt);
        if (fixtures->parsed()) return run_gen_fixtures(opt);
        std::cerr << app.help() << "\n";
        return 2;
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace trignet
