#include "g2p/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "g2p/errors.hpp"

namespace g2p {

namespace {

// Portable uniform double in [0, 1); the distribution classes in
// <random> are implementation-defined, the raw engine output is not.
double next_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double squared_distance(const Matrix& points, std::size_t row,
                        const Matrix& centroids, std::size_t centroid) {
  double sq = 0.0;
  for (std::size_t c = 0; c < points.cols; ++c) {
    const double d = points.at(row, c) - centroids.at(centroid, c);
    sq += d * d;
  }
  return sq;
}

void check_observed_labels(const Graph& graph,
                           const std::vector<NodeId>& observed) {
  for (NodeId node : observed) {
    if (node >= graph.node_count) {
      throw ValidationError("observed set: node id " + std::to_string(node) +
                            " out of range");
    }
    if (!graph.labels.contains(node)) {
      throw ValidationError("observed node " + std::to_string(node) +
                            " has no gold label");
    }
  }
}

const Matrix& require_features(const Graph& graph) {
  if (!graph.features) {
    throw ValidationError("graph has no feature matrix");
  }
  return *graph.features;
}

std::vector<std::string> kmeans_tokens(const Matrix& points, int k,
                                       std::uint64_t seed) {
  const KMeansResult result = kmeans(points, k, seed);
  std::vector<std::string> tokens;
  tokens.reserve(result.assignments.size());
  for (int a : result.assignments) {
    tokens.push_back(std::to_string(a));
  }
  return tokens;
}

}  // namespace

std::string class_letter(int index) {
  if (index < 0 || index >= 26) {
    throw ValidationError("class index " + std::to_string(index) +
                          " has no letter; at most 26 classes are supported");
  }
  return std::string(1, static_cast<char>('A' + index));
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed) {
  if (k < 1) {
    throw ConfigError("kmeans: k must be positive");
  }
  const std::size_t n = points.rows;
  if (n == 0) {
    throw ConfigError("kmeans: no points");
  }
  const std::size_t clusters = static_cast<std::size_t>(k);
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  Matrix centroids(clusters, points.cols);
  std::vector<double> dist_sq(n, 0.0);
  {
    std::size_t first = static_cast<std::size_t>(next_double(rng) * static_cast<double>(n));
    if (first >= n) first = n - 1;
    std::copy_n(points.row(first), points.cols, centroids.row(0));
  }
  for (std::size_t c = 1; c < clusters; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = squared_distance(points, i, centroids, 0);
      for (std::size_t prev = 1; prev < c; ++prev) {
        best = std::min(best, squared_distance(points, i, centroids, prev));
      }
      dist_sq[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = next_double(rng) * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += dist_sq[i];
        if (cumulative >= target) {
          pick = i;
          break;
        }
      }
    }
    std::copy_n(points.row(pick), points.cols, centroids.row(c));
  }

  KMeansResult result;
  result.assignments.assign(n, 0);
  std::vector<int> previous(n, -1);

  for (int iter = 0; iter < 300; ++iter) {
    result.iterations = iter + 1;
    // Assignment step; ties go to the lowest cluster index.
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_sq = squared_distance(points, i, centroids, 0);
      for (std::size_t c = 1; c < clusters; ++c) {
        const double sq = squared_distance(points, i, centroids, c);
        if (sq < best_sq) {
          best_sq = sq;
          best = static_cast<int>(c);
        }
      }
      result.assignments[i] = best;
    }

    // Re-seed empty clusters to the point farthest from its centroid.
    std::vector<std::size_t> counts(clusters, 0);
    for (int a : result.assignments) counts[static_cast<std::size_t>(a)]++;
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] > 0) continue;
      std::size_t farthest = 0;
      double farthest_sq = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto assigned = static_cast<std::size_t>(result.assignments[i]);
        if (counts[assigned] <= 1) continue;
        const double sq = squared_distance(points, i, centroids, assigned);
        if (sq > farthest_sq) {
          farthest_sq = sq;
          farthest = i;
        }
      }
      if (farthest_sq <= 0.0) continue;  // all points coincide with centroids
      counts[static_cast<std::size_t>(result.assignments[farthest])]--;
      result.assignments[farthest] = static_cast<int>(c);
      counts[c] = 1;
      std::copy_n(points.row(farthest), points.cols, centroids.row(c));
    }

    if (result.assignments == previous) break;
    previous = result.assignments;

    // Update step.
    Matrix sums(clusters, points.cols);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(result.assignments[i]);
      counts[c]++;
      for (std::size_t col = 0; col < points.cols; ++col) {
        sums.at(c, col) += points.at(i, col);
      }
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t col = 0; col < points.cols; ++col) {
        centroids.at(c, col) = sums.at(c, col) / static_cast<double>(counts[c]);
      }
    }
  }

  result.centroids = std::move(centroids);
  return result;
}

TextAttribute label_attribute(const Graph& graph,
                              const std::vector<NodeId>& observed) {
  check_observed_labels(graph, observed);
  TextAttribute attr{"label", {}, Provenance::observed_label};
  attr.tokens.assign(graph.node_count, kMissingToken);
  for (NodeId node : observed) {
    attr.tokens[node] = class_letter(graph.labels.at(node));
  }
  return attr;
}

TextAttribute kmeans_attribute(const Graph& graph, int k, std::uint64_t seed) {
  const Matrix& features = require_features(graph);
  TextAttribute attr{"feat", {}, Provenance::kmeans_feature};
  attr.tokens = kmeans_tokens(features, k, seed);
  return attr;
}

TextAttribute propagated_label_attribute(const Graph& graph,
                                         const std::vector<NodeId>& observed,
                                         int hops,
                                         const PropagationConfig& config) {
  check_observed_labels(graph, observed);
  const std::size_t class_count = graph.class_names.size();
  Matrix one_hot(graph.node_count, class_count);
  for (NodeId node : observed) {
    one_hot.at(node, static_cast<std::size_t>(graph.labels.at(node))) = 1.0;
  }
  const SparseMatrix a_hat = normalized_adjacency(graph, config);
  const Matrix mass = propagate(a_hat, std::move(one_hot), hops);

  TextAttribute attr{"pseudo-labels-" + std::to_string(hops), {},
                     Provenance::propagated_label};
  attr.tokens.reserve(graph.node_count);
  for (NodeId i = 0; i < graph.node_count; ++i) {
    std::size_t best = 0;
    double best_mass = 0.0;
    for (std::size_t c = 0; c < class_count; ++c) {
      if (mass.at(i, c) > best_mass) {
        best_mass = mass.at(i, c);
        best = c;
      }
    }
    attr.tokens.push_back(best_mass > 0.0 ? class_letter(static_cast<int>(best))
                                          : kMissingToken);
  }
  return attr;
}

TextAttribute propagated_feature_attribute(const Graph& graph, int hops, int k,
                                           std::uint64_t seed,
                                           const PropagationConfig& config) {
  const Matrix& features = require_features(graph);
  const SparseMatrix a_hat = normalized_adjacency(graph, config);
  const Matrix propagated = propagate(a_hat, features, hops);
  TextAttribute attr{"propagated-feat-" + std::to_string(hops), {},
                     Provenance::propagated_feature};
  attr.tokens = kmeans_tokens(propagated, k, seed);
  return attr;
}

TextAttribute raw_text_attribute(const Graph& graph, const std::string& field,
                                 std::size_t max_chars) {
  auto it = graph.text_fields.find(field);
  if (it == graph.text_fields.end()) {
    throw ConfigError("unknown text field \"" + field + "\"");
  }
  TextAttribute attr{field, {}, Provenance::raw_text};
  attr.tokens.reserve(graph.node_count);
  for (const std::string& text : it->second) {
    if (text.empty()) {
      attr.tokens.emplace_back(kMissingToken);
      continue;
    }
    if (text.size() <= max_chars) {
      attr.tokens.push_back(text);
      continue;
    }
    std::size_t cut = max_chars;
    // Do not split a UTF-8 sequence: back off over continuation bytes.
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
      --cut;
    }
    attr.tokens.push_back(text.substr(0, cut) + "…");
  }
  return attr;
}

}  // namespace g2p
