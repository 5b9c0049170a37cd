#include "g2p/syntax_tree.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "g2p/errors.hpp"

namespace g2p {

namespace {

constexpr const char* kRootTag = "information";
constexpr const char* kRootColonLine = "Graph information:";

bool all_children_are_leaves(const TreeNode& node) {
  if (node.children.empty()) return false;
  return std::all_of(node.children.begin(), node.children.end(),
                     [](const TreeNode& c) { return c.is_leaf; });
}

std::string indent(std::size_t depth) { return std::string(2 * depth, ' '); }

void render_xml(const TreeNode& node, std::size_t depth, bool with_tags,
                std::vector<std::string>& lines) {
  const std::string tag = node.label.tag;
  if (node.is_leaf) {
    // A leaf reached outside the inline form; keep it at its own depth.
    lines.push_back(indent(depth) + render_leaf_tokens(node.leaf_tokens));
    return;
  }
  if (all_children_are_leaves(node)) {
    std::string joined;
    for (const TreeNode& child : node.children) {
      joined += render_leaf_tokens(child.leaf_tokens);
    }
    if (with_tags) {
      lines.push_back(indent(depth) + "<" + tag + ">" + joined + "</" + tag + ">");
    } else {
      lines.push_back(indent(depth) + joined);
    }
    return;
  }
  if (with_tags) lines.push_back(indent(depth) + "<" + tag + ">");
  for (const TreeNode& child : node.children) {
    render_xml(child, depth + 1, with_tags, lines);
  }
  if (with_tags) lines.push_back(indent(depth) + "</" + tag + ">");
}

void collect_leaves(const TreeNode& node, std::vector<std::string>& out) {
  if (node.is_leaf) {
    out.push_back(render_leaf_tokens(node.leaf_tokens));
    return;
  }
  for (const TreeNode& child : node.children) {
    collect_leaves(child, out);
  }
}

void render_colon(const TreeNode& node, std::vector<std::string>& lines) {
  if (node.is_leaf) {
    lines.push_back(render_leaf_tokens(node.leaf_tokens));
    return;
  }
  if (all_children_are_leaves(node)) {
    std::string joined;
    for (const TreeNode& child : node.children) {
      joined += render_leaf_tokens(child.leaf_tokens);
    }
    lines.push_back(node.label.display + ":" + joined);
    return;
  }
  lines.push_back(node.label.display + ":");
  for (const TreeNode& child : node.children) {
    render_colon(child, lines);
  }
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

}  // namespace

std::string sanitize_tag(const std::string& display) {
  std::string tag;
  tag.reserve(display.size());
  for (unsigned char ch : display) {
    if (std::isalnum(ch)) {
      tag.push_back(static_cast<char>(std::tolower(ch)));
    } else {
      tag.push_back('_');
    }
  }
  return tag;
}

NodeLabel make_label(std::string display, std::optional<std::string> tag_override) {
  NodeLabel label;
  label.tag = tag_override ? *tag_override : sanitize_tag(display);
  label.display = std::move(display);
  return label;
}

EgoLists build_ego_subgraph(NodeId center,
                            const std::vector<RelationMatrix>& relations,
                            const std::vector<NodeLabel>& labels,
                            const std::map<std::string, std::size_t>& caps) {
  if (labels.size() != relations.size()) {
    throw ConfigError("build_ego_subgraph: one label per relation required");
  }
  EgoLists ego;
  ego.reserve(relations.size());
  for (std::size_t r = 0; r < relations.size(); ++r) {
    if (center >= relations[r].rows.size()) {
      throw ValidationError("build_ego_subgraph: center node " +
                            std::to_string(center) + " out of range");
    }
    EgoList list;
    list.label = labels[r];
    const auto& row = relations[r].rows[center];
    std::size_t cap = row.size();
    if (auto it = caps.find(labels[r].display); it != caps.end()) {
      cap = std::min(cap, it->second);
    }
    list.nodes.reserve(cap);
    for (std::size_t e = 0; e < cap; ++e) {
      list.nodes.push_back(row[e].first);
    }
    ego.push_back(std::move(list));
  }
  return ego;
}

SyntaxTree build_tree(const std::vector<TextAttribute>& attributes,
                      const std::vector<NodeLabel>& attribute_labels,
                      const EgoLists& ego, Hierarchy hierarchy) {
  if (attributes.size() != attribute_labels.size()) {
    throw ConfigError("build_tree: one label per attribute required");
  }
  if (attributes.empty() || ego.empty()) {
    throw ConfigError("build_tree: at least one attribute and one relation");
  }

  auto make_leaf = [&](const TextAttribute& attr, const EgoList& list) {
    TreeNode leaf;
    leaf.is_leaf = true;
    leaf.leaf_tokens.reserve(list.nodes.size());
    for (NodeId node : list.nodes) {
      leaf.leaf_tokens.push_back(attr.tokens.at(node));
    }
    return leaf;
  };

  SyntaxTree tree;
  if (hierarchy == Hierarchy::attr_major) {
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      TreeNode attr_node;
      attr_node.label = attribute_labels[a];
      for (const EgoList& list : ego) {
        TreeNode rel_node;
        rel_node.label = list.label;
        rel_node.children.push_back(make_leaf(attributes[a], list));
        attr_node.children.push_back(std::move(rel_node));
      }
      tree.root.children.push_back(std::move(attr_node));
    }
  } else {
    for (const EgoList& list : ego) {
      TreeNode rel_node;
      rel_node.label = list.label;
      for (std::size_t a = 0; a < attributes.size(); ++a) {
        TreeNode attr_node;
        attr_node.label = attribute_labels[a];
        attr_node.children.push_back(make_leaf(attributes[a], list));
        rel_node.children.push_back(std::move(attr_node));
      }
      tree.root.children.push_back(std::move(rel_node));
    }
  }
  return tree;
}

std::string render_leaf_tokens(const std::vector<std::string>& tokens) {
  std::string out = "[";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ", ";
    out += '\'';
    for (char ch : tokens[i]) {
      if (ch == '\'') out += "\\'";
      else out += ch;
    }
    out += '\'';
  }
  out += ']';
  return out;
}

std::string render(const SyntaxTree& tree, RenderStyle style) {
  std::vector<std::string> lines;
  switch (style) {
    case RenderStyle::canonical_xml: {
      TreeNode root = tree.root;
      root.label = make_label(kRootTag);
      render_xml(root, 0, /*with_tags=*/true, lines);
      break;
    }
    case RenderStyle::no_internal: {
      TreeNode root = tree.root;
      root.label = make_label(kRootTag);
      render_xml(root, 0, /*with_tags=*/false, lines);
      break;
    }
    case RenderStyle::sequence: {
      collect_leaves(tree.root, lines);
      break;
    }
    case RenderStyle::set: {
      collect_leaves(tree.root, lines);
      std::sort(lines.begin(), lines.end());
      break;
    }
    case RenderStyle::legacy_colon: {
      lines.push_back(kRootColonLine);
      for (const TreeNode& child : tree.root.children) {
        render_colon(child, lines);
      }
      break;
    }
  }
  return join_lines(lines);
}

RenderStyle parse_style(const std::string& name) {
  if (name == "canonical") return RenderStyle::canonical_xml;
  if (name == "no-internal") return RenderStyle::no_internal;
  if (name == "sequence") return RenderStyle::sequence;
  if (name == "set") return RenderStyle::set;
  if (name == "legacy-colon") return RenderStyle::legacy_colon;
  throw ConfigError("unknown render style \"" + name + "\"");
}

std::string style_name(RenderStyle style) {
  switch (style) {
    case RenderStyle::canonical_xml: return "canonical";
    case RenderStyle::no_internal: return "no-internal";
    case RenderStyle::sequence: return "sequence";
    case RenderStyle::set: return "set";
    case RenderStyle::legacy_colon: return "legacy-colon";
  }
  return "canonical";
}

}  // namespace g2p
