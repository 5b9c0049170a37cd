#pragma once

#include <optional>
#include <string>
#include <vector>

#include "g2p/graph.hpp"

namespace g2p {

struct ChatMessage {
  std::string role;
  std::string content;
};

// Ordered (letter, class name) pairs, letters consecutive from 'A'.
struct ChoiceMap {
  std::vector<std::pair<char, std::string>> entries;

  static ChoiceMap from_class_names(const std::vector<std::string>& names);
  // "[A: Agents, B: Artificial Intelligence, ...]"
  std::string bracket_list() const;
  bool contains(char letter) const;
  std::optional<int> index_of(char letter) const;
};

struct Demonstration {
  std::string info_block;
  char gold = 'A';
};

// Text skeleton of an assembled prompt. The placeholder {choices} in
// `system` is replaced with the bracket list.
struct PromptTemplate {
  std::string id;
  std::string system;
  std::string demo_question;
  std::string final_question;
  bool xml_question_tags = true;      // <question>/<answer> vs "Topic of paper:"
  std::string demo_answer_prefix;     // used when xml_question_tags is false
  bool blank_line_before_final = true;
  bool remember_directive = true;
};

// Built-in ids: "citation", "generic", "legacy-colon".
PromptTemplate builtin_template(const std::string& id);

struct PromptBundle {
  PromptTemplate tmpl;
  ChoiceMap choices;
  std::vector<Demonstration> demonstrations;
  std::string query_block;
};

// Highest-degree-per-class demonstration selection: candidates grouped by
// class, sorted by (degree desc, id asc) within each group, then drawn
// round-robin across classes in class order until n_shots nodes are chosen.
// With per_class, n_shots is drawn from every class instead.
std::vector<NodeId> select_demonstrations(const Graph& graph,
                                          const std::vector<NodeId>& train,
                                          std::size_t n_shots,
                                          bool per_class = false);

// One system message plus one user message; byte-deterministic.
std::vector<ChatMessage> assemble_prompt(const PromptBundle& bundle);

// Audit serialization: message contents joined by one blank line.
std::string prompt_text(const std::vector<ChatMessage>& messages);

}  // namespace g2p
