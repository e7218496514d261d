#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "trignet/cli.hpp"
#include "trignet/cost.hpp"
#include "trignet/fixtures.hpp"
#include "trignet/model.hpp"
#include "trignet/serialize.hpp"

namespace py = pybind11;
using namespace trignet;

namespace {

std::vector<std::vector<double>> mat_to_rows(const Mat& m) {
    std::vector<std::vector<double>> rows(m.rows, std::vector<double>(m.cols));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) rows[i][j] = m.at(i, j);
    return rows;
}

}  // namespace

PYBIND11_MODULE(_trignet, m) {
    m.doc() = "Tripartite-graph personality detection: graph construction, flow "
              "attention, training, evaluation and cost profiling.";

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("d", &ModelConfig::d)
        .def_readwrite("heads", &ModelConfig::heads)
        .def_readwrite("layers", &ModelConfig::layers)
        .def_readwrite("traits", &ModelConfig::traits)
        .def_readwrite("max_posts", &ModelConfig::max_posts)
        .def_readwrite("max_post_len", &ModelConfig::max_post_len)
        .def_readwrite("max_nodes", &ModelConfig::max_nodes)
        .def_readwrite("dropout", &ModelConfig::dropout)
        .def_readwrite("lr_graph", &ModelConfig::lr_graph)
        .def_readwrite("batch_size", &ModelConfig::batch_size)
        .def_readwrite("epochs", &ModelConfig::epochs)
        .def_readwrite("patience", &ModelConfig::patience)
        .def_readwrite("seed", &ModelConfig::seed)
        .def_readwrite("tie_mp_params", &ModelConfig::tie_mp_params)
        .def_readwrite("category_names", &ModelConfig::category_names)
        .def_readwrite("dropped_categories", &ModelConfig::dropped_categories)
        .def_property(
            "flows", [](const ModelConfig& c) { return to_string(c.flows); },
            [](ModelConfig& c, const std::string& s) { c.flows = flow_mode_from_string(s); })
        .def("validate", &ModelConfig::validate);

    py::class_<LiwcDictionary>(m, "LiwcDictionary")
        .def("category_names",
             [](const LiwcDictionary& d) {
                 std::vector<std::string> names;
                 for (const auto& [id, cat] : d.categories) names.push_back(cat.name);
                 return names;
             })
        .def("__len__", [](const LiwcDictionary& d) { return d.categories.size(); });

    py::class_<CategorySelection>(m, "CategorySelection")
        .def_readonly("selected", &CategorySelection::selected)
        .def_readonly("resolved", &CategorySelection::resolved)
        .def("__len__", [](const CategorySelection& s) { return s.size(); });

    py::class_<TripartiteGraph>(m, "TripartiteGraph")
        .def_readonly("posts", &TripartiteGraph::posts)
        .def_readonly("words", &TripartiteGraph::words)
        .def_readonly("cats", &TripartiteGraph::cats)
        .def_readonly("wp_edges", &TripartiteGraph::wp_edges)
        .def_readonly("wc_edges", &TripartiteGraph::wc_edges);

    py::class_<GraphStats>(m, "GraphStats")
        .def_readonly("r", &GraphStats::r)
        .def_readonly("m", &GraphStats::m)
        .def_readonly("n", &GraphStats::n)
        .def_readonly("disconnected_posts", &GraphStats::disconnected_posts)
        .def_readonly("liwc_words_per_post", &GraphStats::liwc_words_per_post);

    py::class_<UserExample>(m, "UserExample")
        .def(py::init([](std::string id, std::vector<std::string> posts, std::vector<int> labels) {
                 UserExample u;
                 u.id = std::move(id);
                 u.posts = std::move(posts);
                 u.labels = std::move(labels);
                 return u;
             }),
             py::arg("id"), py::arg("posts"), py::arg("labels") = std::vector<int>{})
        .def_readwrite("id", &UserExample::id)
        .def_readwrite("posts", &UserExample::posts)
        .def_readwrite("labels", &UserExample::labels);

    m.def("tokenize",
          [](const std::string& text, int max_len) { return tokenize(text, max_len).tokens; },
          py::arg("text"), py::arg("max_len") = 70);
    m.def("scrub_label_words",
          [](const std::vector<std::string>& tokens, const std::set<std::string>& lexicon) {
              TokenizedPost p;
              p.tokens = tokens;
              return scrub_label_words(p, lexicon).tokens;
          },
          py::arg("tokens"), py::arg("lexicon"));

    m.def("parse_dictionary", [](const std::string& text) {
        std::istringstream in(text);
        return parse_dictionary(in);
    });
    m.def("parse_dictionary_file", &parse_dictionary_file);
    m.def("default_selection", &default_selection);
    m.def("select_categories", &select_categories);
    m.def("categories_of", [](const LiwcDictionary& d, const std::string& token,
                              const CategorySelection& sel) {
        auto s = categories_of(d, token, sel);
        return std::vector<int>(s.begin(), s.end());
    });

    m.def("build_graph",
          [](const std::vector<std::vector<std::string>>& posts, const LiwcDictionary& dict,
             const CategorySelection& sel, const ModelConfig& cfg) {
              std::vector<TokenizedPost> tp;
              for (const auto& p : posts) tp.push_back(TokenizedPost{p});
              return build_graph(tp, dict, sel, cfg);
          },
          py::arg("posts"), py::arg("dict"), py::arg("selection"), py::arg("config"));
    m.def("graph_stats", &graph_stats);

    m.def("count_mp", &count_mp, py::arg("A"), py::arg("B"), py::arg("E"), py::arg("d"),
          py::arg("heads"));
    m.def("compare_costs",
          [](long r, long mm, long n, long e_wp, long e_wc, int d, int heads, int l_flow,
             int l_vanilla, bool tied) {
              GraphShape s{r, mm, n, e_wp, e_wc, d, heads};
              CostComparison c = compare_costs(s, l_flow, l_vanilla, tied);
              py::dict out;
              out["flops_flow"] = c.flow.flops;
              out["flops_vanilla"] = c.vanilla.flops;
              out["peak_mem_flow_bytes"] = c.flow.peak_mem_bytes;
              out["peak_mem_vanilla_bytes"] = c.vanilla.peak_mem_bytes;
              out["params_flow"] = c.flow.param_count;
              out["params_vanilla"] = c.vanilla.param_count;
              out["flop_reduction"] = c.flop_reduction;
              out["mem_reduction"] = c.mem_reduction;
              return out;
          },
          py::arg("r"), py::arg("m"), py::arg("n"), py::arg("e_wp"), py::arg("e_wc"), py::arg("d"),
          py::arg("heads"), py::arg("l_flow") = 1, py::arg("l_vanilla") = 4,
          py::arg("tied") = false);

    py::class_<EpochStat>(m, "EpochStat")
        .def_readonly("epoch", &EpochStat::epoch)
        .def_readonly("train_loss", &EpochStat::train_loss)
        .def_readonly("has_val", &EpochStat::has_val)
        .def_readonly("val_avg_f1", &EpochStat::val_avg_f1);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("per_trait_f1", &EvalReport::per_trait_f1)
        .def_readonly("average_f1", &EvalReport::average_f1)
        .def("confusion",
             [](const EvalReport& r, int trait) {
                 const auto& c = r.confusions.at(trait).counts;
                 return std::vector<std::vector<long>>{{c[0][0], c[0][1]}, {c[1][0], c[1][1]}};
             });

    py::class_<TrigNet>(m, "TrigNet")
        .def(py::init([](const ModelConfig& cfg, const LiwcDictionary& dict,
                         const std::string& embeddings_path) {
                 EmbeddingProvider provider =
                     embeddings_path.empty()
                         ? EmbeddingProvider::hash_stub(cfg.d, cfg.seed)
                         : EmbeddingProvider::from_file(embeddings_path, cfg.seed);
                 return TrigNet(cfg, dict, std::move(provider));
             }),
             py::arg("config"), py::arg("dict"), py::arg("embeddings_path") = std::string())
        .def("init_params", &TrigNet::init_params)
        .def("train",
             [](TrigNet& model, const std::vector<UserExample>& train_set,
                const std::vector<UserExample>& val_set) {
                 return model.train(train_set, val_set).epochs;
             },
             py::arg("train_set"), py::arg("val_set") = std::vector<UserExample>{})
        .def("evaluate", &TrigNet::evaluate)
        .def("forward_probs",
             [](const TrigNet& model, const UserExample& u) { return mat_to_rows(model.forward(u).probs); })
        .def("user_graph", &TrigNet::user_graph)
        .def("layer_weights", &TrigNet::layer_weights)
        .def("save_checkpoint",
             [](const TrigNet& model, const std::string& path) {
                 save_checkpoint(path, model.params(), model.config());
             })
        .def("load_checkpoint", [](TrigNet& model, const std::string& path) {
            model.load_params(load_checkpoint(path).store);
        });

    m.def("load_dataset", &load_dataset);
    m.def("grad_check_tiny", &grad_check_tiny, py::arg("eps") = 1e-5);
    m.def("gen_fixtures",
          [](const std::string& out_dir, uint64_t seed, int d, int train_users, int val_users) {
              FixtureSpec spec;
              spec.out_dir = out_dir;
              spec.seed = seed;
              spec.d = d;
              spec.train_users = train_users;
              spec.val_users = val_users;
              gen_fixtures(spec);
          },
          py::arg("out_dir"), py::arg("seed") = 42, py::arg("d") = 16, py::arg("train_users") = 32,
          py::arg("val_users") = 16);
    m.def("cli_run", &cli_run, "run a CLI invocation in-process");
}
