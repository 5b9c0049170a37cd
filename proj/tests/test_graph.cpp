#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "g2p/errors.hpp"
#include "g2p/graph.hpp"
#include "oracles.hpp"

using namespace g2p;
using nlohmann::json;

namespace {

json minimal_doc() {
  return json{
      {"nodes", 3},
      {"classes", {"A-class", "B-class"}},
      {"edges", {{0, 1}, {1, 2}}},
      {"features", nullptr},
      {"labels", {{"0", 0}}},
      {"text_fields", nullptr},
  };
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("minimal well-formed document loads") {
  const Graph graph = graph_from_json(minimal_doc(), "doc");
  CHECK(graph.node_count == 3);
  CHECK(graph.class_names.size() == 2);
  CHECK(graph.edges.size() == 2);
  CHECK(graph.labels.at(0) == 0);
}

TEST_CASE("edge referencing an unknown node is a range error") {
  json doc = minimal_doc();
  doc["edges"] = {{0, 7}};
  CHECK_THROWS_AS(graph_from_json(doc, "doc"), ValidationError);
}

TEST_CASE("self-loops and duplicate edges are rejected") {
  json doc = minimal_doc();
  doc["edges"] = {{1, 1}};
  CHECK_THROWS_AS(graph_from_json(doc, "doc"), ValidationError);
  doc["edges"] = {{0, 1}, {1, 0}};  // same edge, swapped orientation
  CHECK_THROWS_AS(graph_from_json(doc, "doc"), ValidationError);
}

TEST_CASE("label and feature invariants are enforced") {
  json doc = minimal_doc();
  doc["labels"] = {{"0", 5}};
  CHECK_THROWS_AS(graph_from_json(doc, "doc"), ValidationError);

  doc = minimal_doc();
  doc["classes"] = {"Only"};
  CHECK_THROWS_AS(graph_from_json(doc, "doc"), ValidationError);

  doc = minimal_doc();
  doc["features"] = {{1.0, 2.0}, {3.0, 4.0}};  // 2 rows for 3 nodes
  CHECK_THROWS_AS(graph_from_json(doc, "doc"), ValidationError);

  doc = minimal_doc();
  doc["text_fields"] = {{"title", {"a", "b"}}};
  CHECK_THROWS_AS(graph_from_json(doc, "doc"), ValidationError);
}

TEST_CASE("cora-shaped document loads with matching shapes") {
  // 2708 nodes, 5278 edges, 7 classes, 1433-dim features; streamed to disk
  // and read back through the standard loader.
  TempFile file("g2p_cora_shape.json");
  {
    std::ofstream out(file.path);
    out << "{\"nodes\":2708,\"classes\":[";
    for (int c = 0; c < 7; ++c) out << (c ? "," : "") << "\"c" << c << "\"";
    out << "],\"edges\":[";
    std::size_t written = 0;
    for (NodeId u = 0; written < 5278; ++u) {
      for (NodeId v = u + 1; v < 2708 && written < 5278; v += 7) {
        out << (written ? "," : "") << "[" << u << "," << v << "]";
        ++written;
      }
    }
    out << "],\"features\":[";
    std::string row = "[";
    for (int d = 0; d < 1433; ++d) row += (d ? ",0" : "0");
    row += "]";
    for (int i = 0; i < 2708; ++i) out << (i ? "," : "") << row;
    out << "],\"labels\":{\"0\":0},\"text_fields\":null}";
  }
  const Graph graph = load_graph(file.path);
  CHECK(graph.node_count == 2708);
  CHECK(graph.edges.size() == 5278);
  CHECK(graph.class_names.size() == 7);
  CHECK(graph.features->rows == 2708);
  CHECK(graph.features->cols == 1433);

  SUBCASE("cora-shaped split loads") {
    Split split;
    json doc;
    for (NodeId i = 0; i < 140; ++i) doc["train"].push_back(i);
    for (NodeId i = 140; i < 640; ++i) doc["val"].push_back(i);
    for (NodeId i = 640; i < 1640; ++i) doc["test"].push_back(i);
    split = split_from_json(doc, graph, "doc");
    CHECK(split.train.size() == 140);
    CHECK(split.val.size() == 500);
    CHECK(split.test.size() == 1000);
  }
}

TEST_CASE("degree matches a brute-force incidence count") {
  const Graph graph = oracle::random_graph(7, {.nodes = 50, .edge_prob = 0.12});
  for (NodeId i = 0; i < graph.node_count; ++i) {
    std::size_t count = 0;
    for (const auto& [u, v] : graph.edges) {
      if (u == i || v == i) ++count;
    }
    CHECK(degree(graph, i) == count);
  }
  CHECK_THROWS_AS(degree(graph, 50), ValidationError);
}

TEST_CASE("isolated node has degree zero") {
  json doc = minimal_doc();
  doc["edges"] = {{0, 1}};
  const Graph graph = graph_from_json(doc, "doc");
  CHECK(degree(graph, 2) == 0);
}

TEST_CASE("save -> load round-trip is the identity") {
  const Graph original =
      oracle::random_graph(11, {.nodes = 25, .edge_prob = 0.2, .features = true});
  TempFile file("g2p_roundtrip.json");
  save_graph(original, file.path);
  const Graph reloaded = load_graph(file.path);
  CHECK(reloaded.node_count == original.node_count);
  CHECK(reloaded.edges == original.edges);
  CHECK(reloaded.labels == original.labels);
  CHECK(reloaded.class_names == original.class_names);
  CHECK(reloaded.text_fields == original.text_fields);
  REQUIRE(reloaded.features.has_value());
  CHECK(reloaded.features->rows == original.features->rows);
  CHECK(reloaded.features->cols == original.features->cols);
  // nlohmann serializes doubles with round-trip precision.
  CHECK(reloaded.features->data == original.features->data);
}

TEST_CASE("random single-field corruption is caught by validation") {
  const Graph graph =
      oracle::random_graph(13, {.nodes = 12, .edge_prob = 0.3, .features = true});
  const json clean = graph_to_json(graph);
  REQUIRE_NOTHROW(graph_from_json(clean, "clean"));

  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    json doc = clean;
    switch (oracle::next_index(rng, 5)) {
      case 0: {  // out-of-range edge endpoint
        const std::size_t e = oracle::next_index(rng, doc["edges"].size());
        doc["edges"][e][1] = graph.node_count + oracle::next_index(rng, 5);
        break;
      }
      case 1: {  // duplicate an edge
        doc["edges"].push_back(doc["edges"][oracle::next_index(rng, doc["edges"].size())]);
        break;
      }
      case 2: {  // out-of-range class index
        doc["labels"]["0"] = static_cast<int>(graph.class_names.size());
        break;
      }
      case 3: {  // drop a feature row
        doc["features"].erase(doc["features"].size() - 1);
        break;
      }
      case 4: {  // self-loop
        doc["edges"].push_back({3, 3});
        break;
      }
    }
    CHECK_THROWS_AS(graph_from_json(doc, "corrupted"), ValidationError);
  }
}

TEST_CASE("split invariants") {
  const Graph graph = graph_from_json(minimal_doc(), "doc");

  SUBCASE("valid split") {
    const Split split = split_from_json(
        json{{"train", {0}}, {"val", {1}}, {"test", {2}}}, graph, "doc");
    CHECK(split.train == std::vector<NodeId>{0});
    CHECK(split.test == std::vector<NodeId>{2});
  }
  SUBCASE("overlap is rejected") {
    CHECK_THROWS_AS(split_from_json(json{{"train", {0}}, {"test", {0}}}, graph, "doc"),
                    ValidationError);
  }
  SUBCASE("unknown id is rejected") {
    CHECK_THROWS_AS(split_from_json(json{{"train", {9}}}, graph, "doc"),
                    ValidationError);
  }
  SUBCASE("duplicate id within one part is rejected") {
    CHECK_THROWS_AS(split_from_json(json{{"train", {1, 1}}}, graph, "doc"),
                    ValidationError);
  }
}

TEST_CASE("missing file raises IoError") {
  CHECK_THROWS_AS(load_graph("/nonexistent/g2p.json"), IoError);
}

TEST_CASE("malformed json raises FormatError") {
  TempFile file("g2p_malformed.json");
  std::ofstream(file.path) << "{not json";
  CHECK_THROWS_AS(load_graph(file.path), FormatError);
}

}  // TEST_SUITE
