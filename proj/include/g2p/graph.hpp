#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "g2p/matrix.hpp"

namespace g2p {

using NodeId = std::size_t;

// Undirected simple attributed graph. Instances are immutable once
// finalized and safe to share read-only across threads.
struct Graph {
  std::size_t node_count = 0;
  // Normalized to (min, max); no self-loops, no duplicates.
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::optional<Matrix> features;  // node_count x d when present
  std::map<NodeId, int> labels;    // partial, class index in [0, C)
  std::vector<std::string> class_names;
  std::map<std::string, std::vector<std::string>> text_fields;

  // Sorted neighbor lists, derived from edges by finalize().
  std::vector<std::vector<NodeId>> adjacency;
};

struct Split {
  std::vector<NodeId> train;  // sorted ascending
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

// Normalizes edge orientation, validates every invariant and builds the
// adjacency lists. Throws ValidationError with the offending location.
void finalize(Graph& graph, const std::string& origin = "graph");

Graph graph_from_json(const nlohmann::json& doc, const std::string& origin);
nlohmann::json graph_to_json(const Graph& graph);

Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& graph, const std::filesystem::path& path);

Split split_from_json(const nlohmann::json& doc, const Graph& graph,
                      const std::string& origin);
Split load_split(const std::filesystem::path& path, const Graph& graph);
nlohmann::json split_to_json(const Split& split);

// Incident edge count; self-loops are never stored so never counted.
std::size_t degree(const Graph& graph, NodeId node);

}  // namespace g2p
