#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "g2p/gateway.hpp"
#include "g2p/graph.hpp"
#include "g2p/relations.hpp"
#include "g2p/syntax_tree.hpp"

namespace g2p {

// Attribute address: "label" | "feat" | "feat:prop:k" | "pseudo:k" | "text:<field>"
struct AttributeSpec {
  std::string name;
  std::optional<std::string> display;  // overrides the default display name
  std::optional<std::string> tag;      // verbatim markup tag override
};

// Relation address: "adjacency" | "spd:k" | "ppr" | "sim:feat" | "sim:prop:k"
struct RelationSpec {
  std::string name;
  std::optional<std::string> display;
  std::optional<std::string> tag;
  std::optional<std::size_t> cap;    // max leaves in the tree
  std::optional<std::size_t> top_k;  // per-relation override (ppr/sim)
};

enum class EvalSetKind { val, test, nodes };

struct EvalSetSpec {
  EvalSetKind kind = EvalSetKind::test;
  std::vector<NodeId> nodes;  // kind == nodes only
};

struct BackendSpec {
  bool mock = true;
  MockPolicy policy = MockPolicy::fixed('A');
  LlmConfig llm;
};

struct RunConfig {
  std::string graph_path;
  std::string split_path;
  std::vector<AttributeSpec> attributes;
  std::vector<RelationSpec> relations;
  Hierarchy hierarchy = Hierarchy::attr_major;
  RenderStyle style = RenderStyle::canonical_xml;
  std::size_t n_shots = 0;
  bool per_class = false;
  std::string template_id = "citation";
  std::optional<std::string> system_override;
  std::optional<std::string> demo_question_override;
  std::optional<std::string> final_question_override;
  BackendSpec backend;
  EvalSetSpec eval_set;
  int samples = 1;
  std::uint64_t seed = 0;
  PropagationConfig propagation;
  double ppr_alpha = 0.25;
  std::size_t ppr_top_k = 4;
  std::size_t sim_top_k = 4;
  std::optional<int> kmeans_k;  // defaults to the class count
  std::size_t raw_text_max_chars = 500;
  bool reask_unparseable = false;  // one re-query per unparseable reply

  nlohmann::json snapshot;  // the resolved document, embedded in reports
};

RunConfig run_config_from_json(nlohmann::json doc, const std::string& origin);
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides);

std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

// Applies "dotted.key=value" to the document, type-checked against the
// value already present (or the built-in defaults).
void apply_override(nlohmann::json& doc, const std::string& assignment);

// CLI style names: canonical, rev-hierarchy, no-internal, sequence, set,
// legacy-colon. "rev-hierarchy" selects canonical rendering with the
// relation-major hierarchy.
void apply_style_name(RunConfig& config, const std::string& style);

}  // namespace g2p
