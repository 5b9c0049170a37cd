#include "g2p/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "g2p/errors.hpp"

namespace g2p {

using nlohmann::json;

namespace {

bool is_nonneg_int(const json& value) {
  return value.is_number_unsigned() ||
         (value.is_number_integer() && value.get<long long>() >= 0);
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& ex) {
    throw FormatError(path.string() + ": " + ex.what());
  }
  return doc;
}

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ValidationError(origin + ": " + what);
}

void check_node_id(const Graph& graph, NodeId id, const std::string& origin,
                   const std::string& where) {
  if (id >= graph.node_count) {
    fail(origin, where + ": node id " + std::to_string(id) +
                     " out of range [0, " + std::to_string(graph.node_count) +
                     ")");
  }
}

std::vector<NodeId> read_id_array(const json& arr, const Graph& graph,
                                  const std::string& origin,
                                  const std::string& name) {
  if (!arr.is_array()) {
    throw FormatError(origin + ": \"" + name + "\" must be an array");
  }
  std::vector<NodeId> ids;
  ids.reserve(arr.size());
  for (const auto& item : arr) {
    if (!is_nonneg_int(item)) {
      throw FormatError(origin + ": \"" + name +
                        "\" entries must be non-negative integers");
    }
    NodeId id = item.get<NodeId>();
    if (id >= graph.node_count) {
      fail(origin, "\"" + name + "\": unknown node id " + std::to_string(id));
    }
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) {
    fail(origin, "\"" + name + "\": duplicate node id " + std::to_string(*dup));
  }
  return ids;
}

}  // namespace

void finalize(Graph& graph, const std::string& origin) {
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    auto& [u, v] = graph.edges[i];
    if (u == v) {
      fail(origin, "edge " + std::to_string(i) + ": self-loop on node " +
                       std::to_string(u));
    }
    check_node_id(graph, u, origin, "edge " + std::to_string(i));
    check_node_id(graph, v, origin, "edge " + std::to_string(i));
    if (u > v) std::swap(u, v);
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    if (!seen.insert(graph.edges[i]).second) {
      fail(origin, "edge " + std::to_string(i) + ": duplicate edge (" +
                       std::to_string(graph.edges[i].first) + ", " +
                       std::to_string(graph.edges[i].second) + ")");
    }
  }

  const int class_count = static_cast<int>(graph.class_names.size());
  for (const auto& [node, cls] : graph.labels) {
    check_node_id(graph, node, origin, "labels");
    if (cls < 0 || cls >= class_count) {
      fail(origin, "label of node " + std::to_string(node) + ": class index " +
                       std::to_string(cls) + " out of range [0, " +
                       std::to_string(class_count) + ")");
    }
  }
  if (!graph.labels.empty() && class_count < 2) {
    fail(origin, "labeled graph needs at least 2 classes, got " +
                     std::to_string(class_count));
  }

  if (graph.features) {
    if (graph.features->rows != graph.node_count) {
      fail(origin, "features: " + std::to_string(graph.features->rows) +
                       " rows for " + std::to_string(graph.node_count) +
                       " nodes");
    }
  }
  for (const auto& [field, values] : graph.text_fields) {
    if (values.size() != graph.node_count) {
      fail(origin, "text field \"" + field + "\": " +
                       std::to_string(values.size()) + " entries for " +
                       std::to_string(graph.node_count) + " nodes");
    }
  }

  graph.adjacency.assign(graph.node_count, {});
  for (const auto& [u, v] : graph.edges) {
    graph.adjacency[u].push_back(v);
    graph.adjacency[v].push_back(u);
  }
  for (auto& neighbors : graph.adjacency) {
    std::sort(neighbors.begin(), neighbors.end());
  }
}

Graph graph_from_json(const json& doc, const std::string& origin) {
  if (!doc.is_object()) {
    throw FormatError(origin + ": top-level value must be an object");
  }
  for (const char* key : {"nodes", "classes", "edges"}) {
    if (!doc.contains(key)) {
      throw FormatError(origin + ": missing required key \"" +
                        std::string(key) + "\"");
    }
  }

  Graph graph;
  if (!is_nonneg_int(doc["nodes"])) {
    throw FormatError(origin + ": \"nodes\" must be a non-negative integer");
  }
  graph.node_count = doc["nodes"].get<std::size_t>();

  if (!doc["classes"].is_array()) {
    throw FormatError(origin + ": \"classes\" must be an array of strings");
  }
  for (const auto& name : doc["classes"]) {
    if (!name.is_string()) {
      throw FormatError(origin + ": \"classes\" must be an array of strings");
    }
    graph.class_names.push_back(name.get<std::string>());
  }

  if (!doc["edges"].is_array()) {
    throw FormatError(origin + ": \"edges\" must be an array of pairs");
  }
  for (std::size_t i = 0; i < doc["edges"].size(); ++i) {
    const auto& e = doc["edges"][i];
    if (!e.is_array() || e.size() != 2 || !is_nonneg_int(e[0]) ||
        !is_nonneg_int(e[1])) {
      throw FormatError(origin + ": edge " + std::to_string(i) +
                        " must be a pair of non-negative integers");
    }
    graph.edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
  }

  if (doc.contains("features") && !doc["features"].is_null()) {
    const auto& rows = doc["features"];
    if (!rows.is_array()) {
      throw FormatError(origin + ": \"features\" must be an array of rows");
    }
    const std::size_t dim = rows.empty() ? 0 : rows[0].size();
    Matrix features(rows.size(), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (!row.is_array() || row.size() != dim) {
        throw FormatError(origin + ": feature row " + std::to_string(r) +
                          " has inconsistent width");
      }
      for (std::size_t c = 0; c < dim; ++c) {
        if (!row[c].is_number()) {
          throw FormatError(origin + ": feature row " + std::to_string(r) +
                            " holds a non-numeric entry");
        }
        features.at(r, c) = row[c].get<double>();
      }
    }
    graph.features = std::move(features);
  }

  if (doc.contains("labels") && !doc["labels"].is_null()) {
    if (!doc["labels"].is_object()) {
      throw FormatError(origin + ": \"labels\" must map id strings to class indices");
    }
    for (const auto& [key, value] : doc["labels"].items()) {
      NodeId node = 0;
      try {
        std::size_t pos = 0;
        node = std::stoull(key, &pos);
        if (pos != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw FormatError(origin + ": label key \"" + key +
                          "\" is not a node id");
      }
      if (!value.is_number_integer()) {
        throw FormatError(origin + ": label of node " + key +
                          " must be an integer class index");
      }
      graph.labels[node] = value.get<int>();
    }
  }

  if (doc.contains("text_fields") && !doc["text_fields"].is_null()) {
    if (!doc["text_fields"].is_object()) {
      throw FormatError(origin + ": \"text_fields\" must be an object");
    }
    for (const auto& [field, values] : doc["text_fields"].items()) {
      if (!values.is_array()) {
        throw FormatError(origin + ": text field \"" + field +
                          "\" must be an array of strings");
      }
      std::vector<std::string> strings;
      strings.reserve(values.size());
      for (const auto& v : values) {
        if (!v.is_string()) {
          throw FormatError(origin + ": text field \"" + field +
                            "\" must contain only strings");
        }
        strings.push_back(v.get<std::string>());
      }
      graph.text_fields[field] = std::move(strings);
    }
  }

  finalize(graph, origin);
  return graph;
}

json graph_to_json(const Graph& graph) {
  json doc;
  doc["nodes"] = graph.node_count;
  doc["classes"] = graph.class_names;
  json edges = json::array();
  for (const auto& [u, v] : graph.edges) {
    edges.push_back(json::array({u, v}));
  }
  doc["edges"] = std::move(edges);
  if (graph.features) {
    json rows = json::array();
    for (std::size_t r = 0; r < graph.features->rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < graph.features->cols; ++c) {
        row.push_back(graph.features->at(r, c));
      }
      rows.push_back(std::move(row));
    }
    doc["features"] = std::move(rows);
  } else {
    doc["features"] = nullptr;
  }
  json labels = json::object();
  for (const auto& [node, cls] : graph.labels) {
    labels[std::to_string(node)] = cls;
  }
  doc["labels"] = std::move(labels);
  if (graph.text_fields.empty()) {
    doc["text_fields"] = nullptr;
  } else {
    json fields = json::object();
    for (const auto& [field, values] : graph.text_fields) {
      fields[field] = values;
    }
    doc["text_fields"] = std::move(fields);
  }
  return doc;
}

Graph load_graph(const std::filesystem::path& path) {
  return graph_from_json(parse_file(path), path.string());
}

void save_graph(const Graph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << graph_to_json(graph).dump(2) << "\n";
}

Split split_from_json(const json& doc, const Graph& graph,
                      const std::string& origin) {
  if (!doc.is_object()) {
    throw FormatError(origin + ": top-level value must be an object");
  }
  Split split;
  split.train = read_id_array(doc.value("train", json::array()), graph, origin,
                              "train");
  split.val =
      read_id_array(doc.value("val", json::array()), graph, origin, "val");
  split.test =
      read_id_array(doc.value("test", json::array()), graph, origin, "test");

  auto overlap = [&](const std::vector<NodeId>& a, const std::vector<NodeId>& b,
                     const char* an, const char* bn) {
    std::vector<NodeId> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(common));
    if (!common.empty()) {
      fail(origin, std::string(an) + "/" + bn + " overlap on node " +
                       std::to_string(common.front()));
    }
  };
  overlap(split.train, split.val, "train", "val");
  overlap(split.train, split.test, "train", "test");
  overlap(split.val, split.test, "val", "test");
  return split;
}

Split load_split(const std::filesystem::path& path, const Graph& graph) {
  return split_from_json(parse_file(path), graph, path.string());
}

json split_to_json(const Split& split) {
  json doc;
  doc["train"] = split.train;
  doc["val"] = split.val;
  doc["test"] = split.test;
  return doc;
}

std::size_t degree(const Graph& graph, NodeId node) {
  if (node >= graph.node_count) {
    throw ValidationError("degree: node id " + std::to_string(node) +
                          " out of range");
  }
  return graph.adjacency[node].size();
}

}  // namespace g2p
