#include "g2p/prompting.hpp"

#include <algorithm>
#include <map>

#include "g2p/attributes.hpp"
#include "g2p/errors.hpp"

namespace g2p {

namespace {

constexpr const char* kRememberDirective =
    "Remember, your answer should be in the form of the class choice wrapped "
    "by <answer> </answer>.";

std::string replace_placeholder(std::string text, const std::string& key,
                                const std::string& value) {
  const std::string placeholder = "{" + key + "}";
  for (std::size_t pos = text.find(placeholder); pos != std::string::npos;
       pos = text.find(placeholder, pos + value.size())) {
    text.replace(pos, placeholder.size(), value);
  }
  return text;
}

}  // namespace

ChoiceMap ChoiceMap::from_class_names(const std::vector<std::string>& names) {
  if (names.size() < 2) {
    throw ValidationError("choice map needs at least 2 classes");
  }
  ChoiceMap map;
  map.entries.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    map.entries.emplace_back(class_letter(static_cast<int>(i))[0], names[i]);
  }
  return map;
}

std::string ChoiceMap::bracket_list() const {
  std::string out = "[";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0) out += ", ";
    out += entries[i].first;
    out += ": ";
    out += entries[i].second;
  }
  out += ']';
  return out;
}

bool ChoiceMap::contains(char letter) const {
  return index_of(letter).has_value();
}

std::optional<int> ChoiceMap::index_of(char letter) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first == letter) return static_cast<int>(i);
  }
  return std::nullopt;
}

PromptTemplate builtin_template(const std::string& id) {
  PromptTemplate t;
  t.id = id;
  if (id == "citation") {
    t.system =
        "You are a helpful assistant that classifies the topic of an academic "
        "paper based on the labels of the cited papers. You are going to "
        "choose the correct answer from several choices of paper categories: "
        "{choices}. " +
        std::string(kRememberDirective);
    t.demo_question = "What's the topic of academic paper given the information above?";
    t.final_question = "What's the topic of the paper given the information above?";
    return t;
  }
  if (id == "generic") {
    t.system =
        "You are a helpful assistant that classifies the category of a node "
        "in a graph based on the labels of related nodes. You are going to "
        "choose the correct answer from several choices of node categories: "
        "{choices}. " +
        std::string(kRememberDirective);
    t.demo_question = "What is the category of this node given the information above?";
    t.final_question = "What is the category of this node given the information above?";
    return t;
  }
  if (id == "legacy-colon") {
    t.system =
        "You are a helpful assistant that classifies the topic of an academic "
        "paper based on the labels of the cited papers. You are going to "
        "choose the correct answer from several choices of paper categories: "
        "{choices}";
    t.demo_question = "";
    t.final_question = "What's the topic of the paper given the information above?";
    t.xml_question_tags = false;
    t.demo_answer_prefix = "Topic of paper: ";
    t.blank_line_before_final = false;
    t.remember_directive = false;
    return t;
  }
  throw ConfigError("unknown prompt template \"" + id + "\"");
}

std::vector<NodeId> select_demonstrations(const Graph& graph,
                                          const std::vector<NodeId>& train,
                                          std::size_t n_shots,
                                          bool per_class) {
  std::vector<std::vector<NodeId>> groups(graph.class_names.size());
  std::size_t labeled = 0;
  for (NodeId node : train) {
    auto it = graph.labels.find(node);
    if (it == graph.labels.end()) continue;
    groups[static_cast<std::size_t>(it->second)].push_back(node);
    ++labeled;
  }
  if (!per_class && n_shots > labeled) {
    throw ConfigError("n_shots=" + std::to_string(n_shots) + " exceeds the " +
                      std::to_string(labeled) + " labeled train nodes");
  }
  for (auto& group : groups) {
    std::sort(group.begin(), group.end(), [&](NodeId a, NodeId b) {
      const std::size_t da = degree(graph, a);
      const std::size_t db = degree(graph, b);
      if (da != db) return da > db;
      return a < b;
    });
  }

  std::vector<NodeId> selected;
  if (per_class) {
    for (const auto& group : groups) {
      for (std::size_t i = 0; i < group.size() && i < n_shots; ++i) {
        selected.push_back(group[i]);
      }
    }
    return selected;
  }

  std::vector<std::size_t> cursor(groups.size(), 0);
  while (selected.size() < n_shots) {
    bool progressed = false;
    for (std::size_t c = 0; c < groups.size() && selected.size() < n_shots; ++c) {
      if (cursor[c] < groups[c].size()) {
        selected.push_back(groups[c][cursor[c]++]);
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return selected;
}

std::vector<ChatMessage> assemble_prompt(const PromptBundle& bundle) {
  const std::string choices = bundle.choices.bracket_list();
  for (const Demonstration& demo : bundle.demonstrations) {
    if (!bundle.choices.contains(demo.gold)) {
      throw ValidationError(std::string("demonstration gold letter '") +
                            demo.gold + "' is not a valid choice");
    }
  }

  std::string user;
  if (!bundle.demonstrations.empty()) {
    user += "Here are a few examples:\n";
    for (std::size_t i = 0; i < bundle.demonstrations.size(); ++i) {
      const Demonstration& demo = bundle.demonstrations[i];
      if (i > 0) user += "\n";
      user += demo.info_block;
      user += '\n';
      if (bundle.tmpl.xml_question_tags) {
        user += "<question>" + bundle.tmpl.demo_question + "</question>\n";
        user += "<answer>" + std::string(1, demo.gold) + "</answer>\n";
      } else {
        user += bundle.tmpl.demo_answer_prefix + std::string(1, demo.gold) + "\n";
      }
    }
    user += '\n';
  }

  user += "Now let's answer the question below:\n";
  user += bundle.query_block;
  user += '\n';
  if (bundle.tmpl.blank_line_before_final) user += '\n';
  user += bundle.tmpl.final_question + " Valid choices are " + choices + ".";
  if (bundle.tmpl.remember_directive) {
    user += '\n';
    user += kRememberDirective;
  }

  return {
      {"system", replace_placeholder(bundle.tmpl.system, "choices", choices)},
      {"user", std::move(user)},
  };
}

std::string prompt_text(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += messages[i].content;
  }
  return out;
}

}  // namespace g2p
