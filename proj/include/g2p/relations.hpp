#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "g2p/graph.hpp"
#include "g2p/matrix.hpp"

namespace g2p {

enum class Normalization { symmetric, row_stochastic };

// Guard against accidental dense blow-up through repeated propagation.
inline constexpr int kMaxPropagationHops = 8;

struct PropagationConfig {
  int hops = 2;
  Normalization normalization = Normalization::row_stochastic;
  bool self_loops = true;
};

// A named ranked-neighbor structure. Within a row, scores are
// non-increasing and ties break by ascending neighbor id; a row never
// contains its own node except for the distance-0 relation.
struct RelationMatrix {
  std::string name;
  std::vector<std::vector<std::pair<NodeId, double>>> rows;
};

// D^{-1/2}(A+I)D^{-1/2} or D^{-1}(A+I) depending on the config. Isolated
// nodes always get self-loop weight 1 so no row is ever all-zero.
SparseMatrix normalized_adjacency(const Graph& graph,
                                  const PropagationConfig& config);

// values <- matrix^hops * values. Throws ConfigError past the hop guard.
Matrix propagate(const SparseMatrix& matrix, Matrix values, int hops);

// Neighbors of each node ranked by normalized adjacency weight.
RelationMatrix adjacency_relation(const Graph& graph,
                                  const PropagationConfig& config);

// Row i holds exactly the nodes at shortest-path distance k from i.
RelationMatrix spd_relation(const Graph& graph, int k);

struct PprOptions {
  double alpha = 0.25;  // restart probability, in (0, 1]
  std::size_t top_k = 4;
  double tolerance = 1e-9;
  int max_iterations = 1000;
};

// Full personalized-PageRank score vector for one source node:
// x = alpha * e_source + (1 - alpha) * A^T x, solved by power iteration.
std::vector<double> ppr_scores(const SparseMatrix& a_hat, NodeId source,
                               const PprOptions& options);

// Row i holds the top_k nodes (self excluded) by PPR mass from i.
RelationMatrix ppr_relation(const Graph& graph, const PprOptions& options,
                            const PropagationConfig& config);

enum class SimilarityKind { cosine, inner_product };

// Row i holds the top_k rows of `values` most similar to row i
// (self excluded). Zero-norm source rows yield empty ranked lists.
RelationMatrix feature_similarity_relation(
    const Matrix& values, std::size_t top_k, std::string name,
    SimilarityKind kind = SimilarityKind::cosine);

// "1st", "2nd", "3rd", "4th", ...
std::string ordinal(int k);

// Default display name for a relation addressed as "spd:k".
std::string spd_display_name(int k);

}  // namespace g2p
