#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "g2p/graph.hpp"
#include "g2p/matrix.hpp"
#include "g2p/relations.hpp"

namespace g2p {

inline constexpr const char* kMissingToken = "NA";

enum class Provenance {
  observed_label,
  kmeans_feature,
  propagated_label,
  propagated_feature,
  raw_text,
};

// A named per-node token sequence. tokens has exactly node_count entries
// and none of them is empty; missing data is the literal token "NA".
struct TextAttribute {
  std::string name;
  std::vector<std::string> tokens;
  Provenance provenance;
};

// Class index -> choice letter ("A".."Z").
std::string class_letter(int index);

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centroids;
  int iterations = 0;
};

// k-means++ seeding with a deterministic RNG, then Lloyd iterations until
// assignments are stable (or 300 rounds). Empty clusters are re-seeded to
// the point farthest from its assigned centroid. Assignment ties break by
// lowest cluster index, so the result is a pure function of (points, k, seed).
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed);

// Observed nodes get their class letter; everything else gets "NA".
TextAttribute label_attribute(const Graph& graph,
                              const std::vector<NodeId>& observed);

// Cluster index of each node's feature row as a decimal token.
TextAttribute kmeans_attribute(const Graph& graph, int k, std::uint64_t seed);

// One-hot observed labels propagated `hops` steps; token is the class
// letter of the row argmax, or "NA" when the row is all-zero.
TextAttribute propagated_label_attribute(const Graph& graph,
                                         const std::vector<NodeId>& observed,
                                         int hops,
                                         const PropagationConfig& config);

// K-means tokens over the propagated feature matrix.
TextAttribute propagated_feature_attribute(const Graph& graph, int hops, int k,
                                           std::uint64_t seed,
                                           const PropagationConfig& config);

// Raw per-node strings, truncated at max_chars bytes (on a UTF-8 boundary)
// with a trailing ellipsis marker; empty strings become "NA".
TextAttribute raw_text_attribute(const Graph& graph, const std::string& field,
                                 std::size_t max_chars);

}  // namespace g2p
