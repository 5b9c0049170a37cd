#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "g2p/answer.hpp"
#include "g2p/attributes.hpp"
#include "g2p/gateway.hpp"
#include "g2p/graph.hpp"
#include "g2p/prompting.hpp"
#include "g2p/run_config.hpp"
#include "g2p/syntax_tree.hpp"

namespace g2p {

// Everything derived once per (graph, split, config): attributes,
// relations, template, choice map and the full demonstration order.
struct Pipeline {
  Graph graph;
  Split split;
  ChoiceMap choices;
  std::vector<TextAttribute> attributes;
  std::vector<NodeLabel> attribute_labels;
  std::vector<RelationMatrix> relations;
  std::vector<NodeLabel> relation_labels;
  std::map<std::string, std::size_t> caps;  // keyed by relation display name
  PromptTemplate tmpl;
  Hierarchy hierarchy = Hierarchy::attr_major;
  RenderStyle style = RenderStyle::canonical_xml;
  // Round-robin selection order over all labeled train nodes; the n-shot
  // demonstration set is always a prefix of this sequence. With per_class
  // the order already holds exactly the chosen demonstrations.
  std::vector<NodeId> demo_order;
  bool per_class = false;
};

Pipeline compile_pipeline(Graph graph, Split split, const RunConfig& config);

// Rendered information block of one node under the pipeline's style.
std::string render_info_block(const Pipeline& pipeline, NodeId node);
std::string render_info_block(const Pipeline& pipeline, NodeId node,
                              RenderStyle style, Hierarchy hierarchy);

PromptBundle make_bundle(const Pipeline& pipeline, NodeId query,
                         std::size_t n_shots);
std::vector<ChatMessage> node_prompt(const Pipeline& pipeline, NodeId query,
                                     std::size_t n_shots);

struct NodeRecord {
  NodeId node = 0;
  std::optional<char> gold;
  Prediction prediction;
  std::size_t prompt_bytes = 0;
  double latency_ms = 0.0;
  std::optional<std::string> error;
};

struct EvalReport {
  std::vector<NodeRecord> records;  // ordered by node id
  std::optional<double> accuracy;   // null when nothing had a gold label
  std::optional<double> unparseable_rate;
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  bool partial = false;  // at least one backend failure
  std::string prompt_hash;
  std::size_t total_prompt_bytes = 0;
  double total_latency_ms = 0.0;
  nlohmann::json config_snapshot;
};

EvalReport run_eval(const Graph& graph, const Split& split,
                    const RunConfig& config);
EvalReport run_eval(const RunConfig& config);  // loads graph/split paths

// One report per shot count; demonstration sets are nested by construction.
std::vector<EvalReport> nshot_sweep(const Graph& graph, const Split& split,
                                    const RunConfig& config,
                                    const std::vector<std::size_t>& shots);

// canonical, rev-hierarchy, no-internal, sequence, set — shared
// demonstrations and eval nodes, per-style prompt hashes in the reports.
std::vector<std::pair<std::string, EvalReport>> ablation_sweep(
    const Graph& graph, const Split& split, const RunConfig& config);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace g2p
