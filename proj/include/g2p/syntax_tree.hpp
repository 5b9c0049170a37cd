#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "g2p/attributes.hpp"
#include "g2p/graph.hpp"
#include "g2p/relations.hpp"

namespace g2p {

enum class Hierarchy { attr_major, rel_major };

enum class RenderStyle {
  canonical_xml,  // <tag> blocks, 2-space indent per depth
  no_internal,    // tags dropped, indentation kept
  sequence,       // leaf lists in traversal order, one per line
  set,            // leaf lists sorted lexicographically
  legacy_colon,   // "Graph information:" / "tag:['A']" lines
};

// Display name plus the resolved markup tag for an internal node.
// `tag` is used verbatim by the xml styles; `display` by the colon style.
struct NodeLabel {
  std::string display;
  std::string tag;
};

// Lowercase, non-alphanumerics to '_'. Config tag overrides bypass this.
std::string sanitize_tag(const std::string& display);

NodeLabel make_label(std::string display,
                     std::optional<std::string> tag_override = std::nullopt);

struct TreeNode {
  NodeLabel label;                       // empty on the root and on leaves
  bool is_leaf = false;
  std::vector<std::string> leaf_tokens;  // valid iff is_leaf
  std::vector<TreeNode> children;        // ordered, order is significant
};

// Ordered rooted tree; the root carries no text.
struct SyntaxTree {
  TreeNode root;
};

// Per-relation ranked node lists for one center node, in relation order.
struct EgoList {
  NodeLabel label;
  std::vector<NodeId> nodes;  // rank order of the relation row
};
using EgoLists = std::vector<EgoList>;

// Top-capped ranked rows of each relation for `center`. Caps are keyed by
// the relation's display name; relations without a cap are uncapped.
EgoLists build_ego_subgraph(NodeId center,
                            const std::vector<RelationMatrix>& relations,
                            const std::vector<NodeLabel>& labels,
                            const std::map<std::string, std::size_t>& caps);

// attr_major: root -> attribute -> relation -> leaf tokens.
// rel_major swaps the two internal levels.
SyntaxTree build_tree(const std::vector<TextAttribute>& attributes,
                      const std::vector<NodeLabel>& attribute_labels,
                      const EgoLists& ego, Hierarchy hierarchy);

// Deterministic rendering of the information block (no trailing newline).
std::string render(const SyntaxTree& tree, RenderStyle style);

// "['A', 'B']" with single-quoted tokens; "[]" when empty.
std::string render_leaf_tokens(const std::vector<std::string>& tokens);

RenderStyle parse_style(const std::string& name);
std::string style_name(RenderStyle style);

}  // namespace g2p
