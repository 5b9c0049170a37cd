#include <doctest.h>

#include <fstream>
#include <sstream>

#include "g2p/answer.hpp"
#include "g2p/errors.hpp"
#include "g2p/evaluation.hpp"
#include "g2p/prompting.hpp"
#include "oracles.hpp"

using namespace g2p;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Graph labeled_graph(std::size_t classes, const std::vector<std::pair<NodeId, int>>& labels,
                    const std::vector<std::pair<NodeId, NodeId>>& edges,
                    std::size_t nodes) {
  Graph graph;
  graph.node_count = nodes;
  for (std::size_t c = 0; c < classes; ++c) {
    graph.class_names.push_back("Class" + std::string(1, static_cast<char>('A' + c)));
  }
  graph.edges = edges;
  for (const auto& [node, cls] : labels) graph.labels[node] = cls;
  finalize(graph);
  return graph;
}

}  // namespace

TEST_SUITE("prompting") {

TEST_CASE("choice map letters are consecutive and formatted like the prompt") {
  const ChoiceMap map = ChoiceMap::from_class_names({"Agents", "Database"});
  CHECK(map.entries[0].first == 'A');
  CHECK(map.entries[1].first == 'B');
  CHECK(map.bracket_list() == "[A: Agents, B: Database]");
  CHECK(map.contains('B'));
  CHECK(!map.contains('C'));
  CHECK_THROWS_AS(ChoiceMap::from_class_names({"Lonely"}), ValidationError);
}

TEST_CASE("selection takes the highest-degree candidate") {
  // Node 1 degree 3, node 2 degree 5.
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId j = 3; j < 6; ++j) edges.emplace_back(1, j);
  for (NodeId j = 3; j < 8; ++j) edges.emplace_back(2, j);
  const Graph graph = labeled_graph(2, {{1, 0}, {2, 0}}, edges, 8);
  CHECK(select_demonstrations(graph, {1, 2}, 1) == std::vector<NodeId>{2});
}

TEST_CASE("n = C picks each class's max-degree node") {
  //  class 0: nodes 0 (deg 2), 1 (deg 0); class 1: 2 (deg 1); class 2: 3 (deg 3)
  std::vector<std::pair<NodeId, NodeId>> edges = {{0, 4}, {0, 5}, {2, 6},
                                                  {3, 4}, {3, 5}, {3, 6}};
  const Graph graph =
      labeled_graph(3, {{0, 0}, {1, 0}, {2, 1}, {3, 2}}, edges, 7);
  CHECK(select_demonstrations(graph, {0, 1, 2, 3}, 3) ==
        std::vector<NodeId>{0, 2, 3});
}

TEST_CASE("round-robin fills 2,2,1 across three classes for n=5") {
  const Graph graph = labeled_graph(
      3, {{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 2}, {6, 2}}, {}, 7);
  const std::vector<NodeId> picked =
      select_demonstrations(graph, {0, 1, 2, 3, 4, 5, 6}, 5);
  // Ties on degree 0 resolve by ascending id; round-robin by class order.
  CHECK(picked == std::vector<NodeId>{0, 3, 5, 1, 4});
}

TEST_CASE("exhausted classes are skipped") {
  const Graph graph = labeled_graph(3, {{0, 0}, {1, 2}, {2, 2}, {3, 2}}, {}, 4);
  CHECK(select_demonstrations(graph, {0, 1, 2, 3}, 4) ==
        std::vector<NodeId>{0, 1, 2, 3});
}

TEST_CASE("n_shots beyond the labeled train pool is an error") {
  const Graph graph = labeled_graph(2, {{0, 0}, {1, 1}}, {}, 3);
  CHECK_THROWS_AS(select_demonstrations(graph, {0, 1}, 3), ConfigError);
}

TEST_CASE("per-class selection draws n from every class") {
  const Graph graph = labeled_graph(
      2, {{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}}, {}, 5);
  CHECK(select_demonstrations(graph, {0, 1, 2, 3, 4}, 2, true) ==
        std::vector<NodeId>{0, 1, 3, 4});
}

TEST_CASE("zero-shot prompts omit the examples section") {
  PromptBundle bundle;
  bundle.tmpl = builtin_template("citation");
  bundle.choices = ChoiceMap::from_class_names({"Agents", "Database"});
  bundle.query_block = "<information>\n</information>";
  const auto messages = assemble_prompt(bundle);
  REQUIRE(messages.size() == 2);
  CHECK(messages[0].role == "system");
  CHECK(messages[1].role == "user");
  CHECK(messages[1].content.find("Here are a few examples") == std::string::npos);
  CHECK(messages[1].content.rfind("Now let's answer the question below:", 0) == 0);
}

TEST_CASE("demonstration gold letters must be valid choices") {
  PromptBundle bundle;
  bundle.tmpl = builtin_template("citation");
  bundle.choices = ChoiceMap::from_class_names({"Agents", "Database"});
  bundle.query_block = "x";
  bundle.demonstrations.push_back({"block", 'Z'});
  CHECK_THROWS_AS(assemble_prompt(bundle), ValidationError);
}

TEST_CASE("assembled prompt matches the committed golden transcript") {
  RunConfig config = load_run_config(std::string(G2P_CONFIG_DIR) + "/citeseer_mini.json");
  const Graph graph = load_graph(config.graph_path);
  const Split split = load_split(config.split_path, graph);
  const Pipeline pipeline = compile_pipeline(graph, split, config);
  const std::string prompt = prompt_text(node_prompt(pipeline, 8, 1));
  CHECK(prompt == read_file(std::string(G2P_GOLDEN_DIR) + "/citeseer_icl_prompt.txt"));
}

TEST_CASE("prompt length grows strictly with the shot count") {
  RunConfig config = load_run_config(std::string(G2P_CONFIG_DIR) + "/synthetic_eval.json");
  const Graph graph = load_graph(config.graph_path);
  const Split split = load_split(config.split_path, graph);
  const Pipeline pipeline = compile_pipeline(graph, split, config);
  std::size_t previous = 0;
  for (std::size_t shots : {1, 3, 5, 10, 15, 20}) {
    const std::size_t bytes = prompt_text(node_prompt(pipeline, 30, shots)).size();
    CHECK(bytes > previous);
    previous = bytes;
  }
}

TEST_CASE("query gold labels never reach the prompt") {
  RunConfig config = load_run_config(std::string(G2P_CONFIG_DIR) + "/synthetic_eval.json");
  Graph graph = load_graph(config.graph_path);
  const Split split = load_split(config.split_path, graph);
  const NodeId query = split.test.front();
  const std::string before =
      prompt_text(node_prompt(compile_pipeline(graph, split, config), query, 4));
  graph.labels[query] = (graph.labels[query] + 1) % 4;
  const std::string after =
      prompt_text(node_prompt(compile_pipeline(graph, split, config), query, 4));
  CHECK(before == after);
}

TEST_CASE("prompts are injective in the query block") {
  RunConfig config = load_run_config(std::string(G2P_CONFIG_DIR) + "/citeseer_mini.json");
  const Graph graph = load_graph(config.graph_path);
  const Split split = load_split(config.split_path, graph);
  const Pipeline pipeline = compile_pipeline(graph, split, config);
  const std::string block_a = render_info_block(pipeline, 8);
  const std::string block_b = render_info_block(pipeline, 2);
  REQUIRE(block_a != block_b);
  CHECK(prompt_text(node_prompt(pipeline, 8, 1)) !=
        prompt_text(node_prompt(pipeline, 2, 1)));
}

TEST_CASE("demonstrations and query share one render configuration") {
  RunConfig config = load_run_config(std::string(G2P_CONFIG_DIR) + "/citeseer_mini.json");
  const Graph graph = load_graph(config.graph_path);
  const Split split = load_split(config.split_path, graph);
  const Pipeline pipeline = compile_pipeline(graph, split, config);
  const PromptBundle bundle = make_bundle(pipeline, 8, 1);
  REQUIRE(bundle.demonstrations.size() == 1);
  // Both blocks came from render_info_block under the same pipeline.
  CHECK(bundle.demonstrations[0].info_block == render_info_block(pipeline, 0));
  CHECK(bundle.query_block == render_info_block(pipeline, 8));
}

TEST_CASE("demonstration answers round-trip through the parser") {
  RunConfig config = load_run_config(std::string(G2P_CONFIG_DIR) + "/synthetic_eval.json");
  const Graph graph = load_graph(config.graph_path);
  const Split split = load_split(config.split_path, graph);
  const Pipeline pipeline = compile_pipeline(graph, split, config);
  for (std::size_t shots : {1, 4, 8}) {
    const PromptBundle bundle = make_bundle(pipeline, 50, shots);
    for (const Demonstration& demo : bundle.demonstrations) {
      const std::string answer_text =
          "<answer>" + std::string(1, demo.gold) + "</answer>";
      const Prediction parsed = parse_answer(answer_text, bundle.choices);
      CHECK(parsed.status == ParseStatus::tag_parsed);
      CHECK(*parsed.letter == demo.gold);
    }
  }
}

TEST_CASE("unknown template id is a config error") {
  CHECK_THROWS_AS(builtin_template("haiku"), ConfigError);
}

}  // TEST_SUITE
