#include "g2p/relations.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "g2p/errors.hpp"

namespace g2p {

namespace {

// Stable rank: score descending, ties by ascending node id.
std::vector<std::pair<NodeId, double>> rank_entries(
    std::vector<std::pair<NodeId, double>> entries, std::size_t top_k) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (entries.size() > top_k) entries.resize(top_k);
  return entries;
}

}  // namespace

SparseMatrix normalized_adjacency(const Graph& graph,
                                  const PropagationConfig& config) {
  const std::size_t n = graph.node_count;
  SparseMatrix out;
  out.rows = out.cols = n;
  out.row_ptr.reserve(n + 1);
  out.row_ptr.push_back(0);

  std::vector<double> weight(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    const bool isolated = graph.adjacency[i].empty();
    const bool self = config.self_loops || isolated;
    weight[i] = static_cast<double>(graph.adjacency[i].size()) + (self ? 1.0 : 0.0);
  }

  for (NodeId i = 0; i < n; ++i) {
    const bool isolated = graph.adjacency[i].empty();
    const bool self = config.self_loops || isolated;
    std::size_t pos = 0;
    auto push = [&](NodeId j) {
      double v = 0.0;
      if (config.normalization == Normalization::row_stochastic) {
        v = 1.0 / weight[i];
      } else {
        v = 1.0 / std::sqrt(weight[i] * weight[j]);
      }
      out.col.push_back(j);
      out.val.push_back(v);
    };
    // Keep columns ascending: splice the self entry into the sorted
    // neighbor list.
    for (; pos < graph.adjacency[i].size() && graph.adjacency[i][pos] < i; ++pos) {
      push(graph.adjacency[i][pos]);
    }
    if (self) push(i);
    for (; pos < graph.adjacency[i].size(); ++pos) {
      push(graph.adjacency[i][pos]);
    }
    out.row_ptr.push_back(out.col.size());
  }
  return out;
}

Matrix propagate(const SparseMatrix& matrix, Matrix values, int hops) {
  if (hops < 0) {
    throw ConfigError("propagate: negative hop count");
  }
  if (hops > kMaxPropagationHops) {
    throw ConfigError("propagate: " + std::to_string(hops) +
                      " hops exceeds the guard limit of " +
                      std::to_string(kMaxPropagationHops));
  }
  for (int step = 0; step < hops; ++step) {
    values = multiply(matrix, values);
  }
  return values;
}

RelationMatrix adjacency_relation(const Graph& graph,
                                  const PropagationConfig& config) {
  const SparseMatrix a_hat = normalized_adjacency(graph, config);
  RelationMatrix rel;
  rel.name = "adjacency";
  rel.rows.resize(graph.node_count);
  for (NodeId i = 0; i < graph.node_count; ++i) {
    std::vector<std::pair<NodeId, double>> entries;
    for (std::size_t e = a_hat.row_ptr[i]; e < a_hat.row_ptr[i + 1]; ++e) {
      if (a_hat.col[e] == i) continue;
      entries.emplace_back(a_hat.col[e], a_hat.val[e]);
    }
    rel.rows[i] =
        rank_entries(std::move(entries), std::numeric_limits<std::size_t>::max());
  }
  return rel;
}

RelationMatrix spd_relation(const Graph& graph, int k) {
  if (k < 0) {
    throw ConfigError("spd_relation: negative distance");
  }
  RelationMatrix rel;
  rel.name = spd_display_name(k);
  rel.rows.resize(graph.node_count);

  std::vector<int> dist(graph.node_count);
  for (NodeId source = 0; source < graph.node_count; ++source) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<NodeId> frontier{source};
    dist[source] = 0;
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop_front();
      if (dist[u] >= k) continue;
      for (NodeId v : graph.adjacency[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          frontier.push_back(v);
        }
      }
    }
    auto& row = rel.rows[source];
    for (NodeId v = 0; v < graph.node_count; ++v) {
      if (dist[v] == k) row.emplace_back(v, 1.0);
    }
  }
  return rel;
}

std::vector<double> ppr_scores(const SparseMatrix& a_hat, NodeId source,
                               const PprOptions& options) {
  if (options.alpha <= 0.0 || options.alpha > 1.0) {
    throw ConfigError("ppr: alpha must lie in (0, 1]");
  }
  const std::size_t n = a_hat.rows;
  std::vector<double> x(n, 0.0);
  x[source] = 1.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::vector<double> next = transpose_multiply(a_hat, x);
    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] *= (1.0 - options.alpha);
      if (j == source) next[j] += options.alpha;
      delta += std::abs(next[j] - x[j]);
    }
    x = std::move(next);
    if (delta < options.tolerance) return x;
  }
  // Compute the final residual for the error report.
  std::vector<double> next = transpose_multiply(a_hat, x);
  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double target = next[j] * (1.0 - options.alpha) + (j == source ? options.alpha : 0.0);
    residual += std::abs(target - x[j]);
  }
  throw ConvergenceError(
      "ppr: no convergence for source " + std::to_string(source) + " after " +
      std::to_string(options.max_iterations) +
      " iterations, residual=" + std::to_string(residual));
}

RelationMatrix ppr_relation(const Graph& graph, const PprOptions& options,
                            const PropagationConfig& config) {
  const SparseMatrix a_hat = normalized_adjacency(graph, config);
  RelationMatrix rel;
  rel.name = "ppr";
  rel.rows.resize(graph.node_count);
  for (NodeId i = 0; i < graph.node_count; ++i) {
    const std::vector<double> scores = ppr_scores(a_hat, i, options);
    std::vector<std::pair<NodeId, double>> entries;
    for (NodeId j = 0; j < graph.node_count; ++j) {
      if (j == i || scores[j] <= 0.0) continue;
      entries.emplace_back(j, scores[j]);
    }
    rel.rows[i] = rank_entries(std::move(entries), options.top_k);
  }
  return rel;
}

RelationMatrix feature_similarity_relation(const Matrix& values,
                                           std::size_t top_k, std::string name,
                                           SimilarityKind kind) {
  const std::size_t n = values.rows;
  std::vector<double> norm(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < values.cols; ++c) {
      sq += values.at(i, c) * values.at(i, c);
    }
    norm[i] = std::sqrt(sq);
  }

  RelationMatrix rel;
  rel.name = std::move(name);
  rel.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == SimilarityKind::cosine && norm[i] == 0.0) continue;
    std::vector<std::pair<NodeId, double>> entries;
    entries.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double dot = 0.0;
      for (std::size_t c = 0; c < values.cols; ++c) {
        dot += values.at(i, c) * values.at(j, c);
      }
      double score = dot;
      if (kind == SimilarityKind::cosine) {
        score = (norm[j] == 0.0) ? 0.0 : dot / (norm[i] * norm[j]);
      }
      entries.emplace_back(j, score);
    }
    rel.rows[i] = rank_entries(std::move(entries), top_k);
  }
  return rel;
}

std::string ordinal(int k) {
  const int mod100 = k % 100;
  const int mod10 = k % 10;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    if (mod10 == 1) suffix = "st";
    else if (mod10 == 2) suffix = "nd";
    else if (mod10 == 3) suffix = "rd";
  }
  return std::to_string(k) + suffix;
}

std::string spd_display_name(int k) {
  if (k == 0) return "center-node";
  return ordinal(k) + "-hop";
}

}  // namespace g2p
