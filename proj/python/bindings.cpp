// Python bindings for the main operations: loading graphs, building
// relations and text attributes, compiling prompts, parsing answers and
// running mock evaluations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "g2p/answer.hpp"
#include "g2p/attributes.hpp"
#include "g2p/errors.hpp"
#include "g2p/evaluation.hpp"
#include "g2p/gateway.hpp"
#include "g2p/graph.hpp"
#include "g2p/relations.hpp"
#include "g2p/run_config.hpp"

namespace py = pybind11;
using namespace g2p;

namespace {

PropagationConfig make_propagation(bool row_stochastic, bool self_loops) {
  PropagationConfig config;
  config.normalization =
      row_stochastic ? Normalization::row_stochastic : Normalization::symmetric;
  config.self_loops = self_loops;
  return config;
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols) {
      throw ConfigError("rows must share one width");
    }
    for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
  }
  return m;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    rows[r].assign(m.row(r), m.row(r) + m.cols);
  }
  return rows;
}

std::vector<ChatMessage> messages_from(const std::vector<std::map<std::string, std::string>>& raw) {
  std::vector<ChatMessage> messages;
  for (const auto& item : raw) {
    messages.push_back({item.at("role"), item.at("content")});
  }
  return messages;
}

}  // namespace

PYBIND11_MODULE(_graph2prompt, m) {
  m.doc() = "graph-to-prompt compiler for multi-choice node classification";

  py::register_exception<Error>(m, "GraphToPromptError");

  py::class_<Graph>(m, "Graph")
      .def_readonly("node_count", &Graph::node_count)
      .def_readonly("edges", &Graph::edges)
      .def_readonly("class_names", &Graph::class_names)
      .def_readonly("labels", &Graph::labels)
      .def("degree", [](const Graph& g, NodeId node) { return degree(g, node); })
      .def("features", [](const Graph& g) -> py::object {
        if (!g.features) return py::none();
        return py::cast(rows_of(*g.features));
      });

  py::class_<Split>(m, "Split")
      .def_readonly("train", &Split::train)
      .def_readonly("val", &Split::val)
      .def_readonly("test", &Split::test);

  m.def("load_graph", [](const std::string& path) { return load_graph(path); });
  m.def("load_split", [](const std::string& path, const Graph& graph) {
    return load_split(path, graph);
  });

  m.def(
      "propagate",
      [](const Graph& graph, const std::vector<std::vector<double>>& values,
         int hops, bool row_stochastic, bool self_loops) {
        const SparseMatrix a_hat = normalized_adjacency(
            graph, make_propagation(row_stochastic, self_loops));
        return rows_of(propagate(a_hat, matrix_from_rows(values), hops));
      },
      py::arg("graph"), py::arg("values"), py::arg("hops"),
      py::arg("row_stochastic") = true, py::arg("self_loops") = true);

  m.def(
      "spd_rows",
      [](const Graph& graph, int k) { return spd_relation(graph, k).rows; },
      py::arg("graph"), py::arg("k"));
  m.def(
      "ppr_rows",
      [](const Graph& graph, double alpha, std::size_t top_k,
         bool row_stochastic, bool self_loops) {
        PprOptions options;
        options.alpha = alpha;
        options.top_k = top_k;
        return ppr_relation(graph, options,
                            make_propagation(row_stochastic, self_loops))
            .rows;
      },
      py::arg("graph"), py::arg("alpha") = 0.25, py::arg("top_k") = 4,
      py::arg("row_stochastic") = true, py::arg("self_loops") = true);
  m.def(
      "similarity_rows",
      [](const std::vector<std::vector<double>>& values, std::size_t top_k) {
        return feature_similarity_relation(matrix_from_rows(values), top_k, "sim")
            .rows;
      },
      py::arg("values"), py::arg("top_k") = 4);

  m.def(
      "label_tokens",
      [](const Graph& graph, const std::vector<NodeId>& observed) {
        return label_attribute(graph, observed).tokens;
      },
      py::arg("graph"), py::arg("observed"));
  m.def(
      "pseudo_label_tokens",
      [](const Graph& graph, const std::vector<NodeId>& observed, int hops) {
        return propagated_label_attribute(graph, observed, hops, {}).tokens;
      },
      py::arg("graph"), py::arg("observed"), py::arg("hops"));
  m.def(
      "kmeans_tokens",
      [](const Graph& graph, int k, std::uint64_t seed) {
        return kmeans_attribute(graph, k, seed).tokens;
      },
      py::arg("graph"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "node_prompt",
      [](const std::string& config_path, NodeId node, int shots) {
        RunConfig config = load_run_config(config_path);
        if (shots >= 0) config.n_shots = static_cast<std::size_t>(shots);
        const Graph graph = load_graph(config.graph_path);
        const Split split = load_split(config.split_path, graph);
        const Pipeline pipeline = compile_pipeline(graph, split, config);
        const auto messages = node_prompt(pipeline, node, config.n_shots);
        std::vector<std::map<std::string, std::string>> out;
        for (const ChatMessage& message : messages) {
          out.push_back({{"role", message.role}, {"content", message.content}});
        }
        return out;
      },
      py::arg("config_path"), py::arg("node"), py::arg("shots") = -1);

  m.def(
      "parse_answer",
      [](const std::string& raw, const std::vector<std::string>& class_names) {
        const Prediction p =
            parse_answer(raw, ChoiceMap::from_class_names(class_names));
        py::dict out;
        out["letter"] = p.letter ? py::cast(std::string(1, *p.letter)) : py::none();
        out["status"] = parse_status_name(p.status);
        return out;
      },
      py::arg("raw"), py::arg("class_names"));

  m.def(
      "mock_complete",
      [](const std::vector<std::map<std::string, std::string>>& messages,
         const std::string& policy) {
        return mock_complete(messages_from(messages), MockPolicy::from_name(policy));
      },
      py::arg("messages"), py::arg("policy"));

  m.def(
      "run_eval",
      [](const std::string& config_path) {
        const EvalReport report = run_eval(load_run_config(config_path));
        return report_to_json(report).dump();
      },
      py::arg("config_path"));
}
