// Regenerates data/synthetic.json and data/synthetic.split.json: a seeded
// 100-node planted-partition graph with 4 balanced classes, block-noise
// features, full gold labels, and a 5-per-class train split. The committed
// files are the output of this program with default arguments.

#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "g2p/graph.hpp"

namespace {

// Raw-engine uniform; distribution classes are implementation-defined.
double next_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "data";
  constexpr std::size_t kNodes = 100;
  constexpr std::size_t kClasses = 4;
  constexpr std::size_t kPerClass = kNodes / kClasses;
  constexpr std::size_t kTrainPerClass = 5;
  constexpr double kIntraP = 0.3;
  constexpr double kInterP = 0.02;
  constexpr std::size_t kFeatureDim = 8;
  std::mt19937_64 rng(20240901);

  g2p::Graph graph;
  graph.node_count = kNodes;
  graph.class_names = {"Alpha", "Beta", "Gamma", "Delta"};

  auto cls = [&](g2p::NodeId i) { return static_cast<int>(i / kPerClass); };
  for (g2p::NodeId i = 0; i < kNodes; ++i) {
    graph.labels[i] = cls(i);
  }

  for (g2p::NodeId u = 0; u < kNodes; ++u) {
    for (g2p::NodeId v = u + 1; v < kNodes; ++v) {
      const double p = cls(u) == cls(v) ? kIntraP : kInterP;
      if (next_double(rng) < p) graph.edges.emplace_back(u, v);
    }
  }

  // Planted partitions must leave nobody isolated; wire stragglers to a
  // same-class neighbor.
  std::set<g2p::NodeId> touched;
  for (const auto& [u, v] : graph.edges) {
    touched.insert(u);
    touched.insert(v);
  }
  for (g2p::NodeId i = 0; i < kNodes; ++i) {
    if (!touched.contains(i)) {
      const g2p::NodeId buddy = (i % kPerClass == 0) ? i + 1 : i - 1;
      graph.edges.emplace_back(std::min(i, buddy), std::max(i, buddy));
    }
  }

  // One ambiguous bridge per class: the last test node of each block is
  // rewired onto five fresh train leaves whose labels read [c, d, c, d, d]
  // in id order (d = the next class). The wrong class then owns the 1-hop
  // majority, so the bridge's own propagated label tips to d, while the
  // five leaves tie exactly in PageRank and the lowest id (class c) ranks
  // first. A center-copy reader errs on these nodes; a ranked-list reader
  // does not.
  {
    g2p::NodeId next_id = kNodes;
    for (std::size_t c = 0; c < kClasses; ++c) {
      const g2p::NodeId bridge = c * kPerClass + kPerClass - 1;
      std::erase_if(graph.edges, [&](const auto& e) {
        return e.first == bridge || e.second == bridge;
      });
      const int wrong = static_cast<int>((c + 1) % kClasses);
      const int leaf_labels[5] = {static_cast<int>(c), wrong, static_cast<int>(c),
                                  wrong, wrong};
      for (int label : leaf_labels) {
        graph.labels[next_id] = label;
        graph.edges.emplace_back(bridge, next_id);
        ++next_id;
      }
    }
    graph.node_count = next_id;
  }

  g2p::Matrix features(graph.node_count, kFeatureDim);
  for (g2p::NodeId i = 0; i < graph.node_count; ++i) {
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      features.at(i, d) = next_double(rng) - 0.5;
    }
    features.at(i, static_cast<std::size_t>(graph.labels.at(i)) * 2) += 3.0;
  }
  graph.features = std::move(features);

  g2p::finalize(graph);

  g2p::Split split;
  for (g2p::NodeId i = 0; i < kNodes; ++i) {
    if (i % kPerClass < kTrainPerClass) {
      split.train.push_back(i);
    } else {
      split.test.push_back(i);
    }
  }
  // The bridge leaves are observed; they carry the gadget's label mass.
  for (g2p::NodeId i = kNodes; i < graph.node_count; ++i) {
    split.train.push_back(i);
  }

  std::ofstream graph_out(out_dir + "/synthetic.json");
  graph_out << g2p::graph_to_json(graph).dump() << "\n";
  std::ofstream split_out(out_dir + "/synthetic.split.json");
  split_out << g2p::split_to_json(split).dump() << "\n";
  std::cout << "wrote " << out_dir << "/synthetic.json (" << graph.edges.size()
            << " edges)\n";
  return 0;
}
