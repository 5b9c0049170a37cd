#include "g2p/evaluation.hpp"

#include <algorithm>
#include <sstream>

#include "g2p/errors.hpp"

namespace g2p {

using nlohmann::json;

namespace {

// "spd:2" -> ("spd", "2"); "label" -> ("label", "")
std::pair<std::string, std::string> split_address(const std::string& name) {
  const std::size_t colon = name.find(':');
  if (colon == std::string::npos) return {name, ""};
  return {name.substr(0, colon), name.substr(colon + 1)};
}

int parse_hops(const std::string& text, const std::string& name) {
  try {
    std::size_t pos = 0;
    const int hops = std::stoi(text, &pos);
    if (pos != text.size() || hops < 0) throw std::invalid_argument(text);
    return hops;
  } catch (const std::exception&) {
    throw ConfigError("bad hop count in \"" + name + "\"");
  }
}

TextAttribute build_attribute(const Graph& graph, const Split& split,
                              const AttributeSpec& spec,
                              const RunConfig& config) {
  const auto [kind, arg] = split_address(spec.name);
  const int k = config.kmeans_k.value_or(
      static_cast<int>(std::max<std::size_t>(graph.class_names.size(), 1)));
  if (kind == "label" && arg.empty()) {
    return label_attribute(graph, split.train);
  }
  if (kind == "feat" && arg.empty()) {
    return kmeans_attribute(graph, k, config.seed);
  }
  if (kind == "feat" && arg.rfind("prop:", 0) == 0) {
    return propagated_feature_attribute(graph, parse_hops(arg.substr(5), spec.name),
                                        k, config.seed, config.propagation);
  }
  if (kind == "pseudo") {
    return propagated_label_attribute(graph, split.train,
                                      parse_hops(arg, spec.name),
                                      config.propagation);
  }
  if (kind == "text" && !arg.empty()) {
    return raw_text_attribute(graph, arg, config.raw_text_max_chars);
  }
  throw ConfigError("unknown attribute \"" + spec.name +
                    "\" (expected label, feat, feat:prop:k, pseudo:k or "
                    "text:<field>)");
}

RelationMatrix build_relation(const Graph& graph, const RelationSpec& spec,
                              const RunConfig& config) {
  const auto [kind, arg] = split_address(spec.name);
  if (kind == "adjacency" && arg.empty()) {
    return adjacency_relation(graph, config.propagation);
  }
  if (kind == "spd") {
    return spd_relation(graph, parse_hops(arg, spec.name));
  }
  if (kind == "ppr" && arg.empty()) {
    PprOptions options;
    options.alpha = config.ppr_alpha;
    options.top_k = spec.top_k.value_or(config.ppr_top_k);
    return ppr_relation(graph, options, config.propagation);
  }
  if (kind == "sim") {
    if (!graph.features) {
      throw ValidationError("relation \"" + spec.name +
                            "\" needs a feature matrix");
    }
    const std::size_t top_k = spec.top_k.value_or(config.sim_top_k);
    if (arg == "feat") {
      return feature_similarity_relation(*graph.features, top_k,
                                         "feature-similarity-graph");
    }
    if (arg.rfind("prop:", 0) == 0) {
      const int hops = parse_hops(arg.substr(5), spec.name);
      const SparseMatrix a_hat = normalized_adjacency(graph, config.propagation);
      const Matrix propagated = propagate(a_hat, *graph.features, hops);
      return feature_similarity_relation(
          propagated, top_k, ordinal(hops) + "-feature-similarity-graph");
    }
  }
  throw ConfigError("unknown relation \"" + spec.name +
                    "\" (expected adjacency, spd:k, ppr, sim:feat or "
                    "sim:prop:k)");
}

std::vector<NodeId> eval_nodes(const Split& split, const Graph& graph,
                               const EvalSetSpec& spec) {
  std::vector<NodeId> nodes;
  switch (spec.kind) {
    case EvalSetKind::val: nodes = split.val; break;
    case EvalSetKind::test: nodes = split.test; break;
    case EvalSetKind::nodes: nodes = spec.nodes; break;
  }
  for (NodeId node : nodes) {
    if (node >= graph.node_count) {
      throw ValidationError("eval set: node id " + std::to_string(node) +
                            " out of range");
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

// Majority vote over the per-sample predictions; ties resolve to the
// letter that reached its count first.
Prediction majority_prediction(const std::vector<Prediction>& samples) {
  std::vector<std::pair<char, int>> counts;
  for (const Prediction& sample : samples) {
    if (!sample.letter) continue;
    auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& kv) {
      return kv.first == *sample.letter;
    });
    if (it == counts.end()) {
      counts.emplace_back(*sample.letter, 1);
    } else {
      it->second++;
    }
  }
  if (counts.empty()) return samples.front();
  char winner = counts.front().first;
  int best = 0;
  for (const auto& [letter, count] : counts) {
    if (count > best) {
      best = count;
      winner = letter;
    }
  }
  for (const Prediction& sample : samples) {
    if (sample.letter && *sample.letter == winner) return sample;
  }
  return samples.front();
}

EvalReport evaluate(const Pipeline& pipeline, const RunConfig& config,
                    std::size_t n_shots) {
  const std::vector<NodeId> nodes =
      eval_nodes(pipeline.split, pipeline.graph, config.eval_set);

  std::vector<std::vector<ChatMessage>> prompts;
  std::vector<std::size_t> prompt_bytes(nodes.size(), 0);
  prompts.reserve(nodes.size());
  std::string hash_input;
  for (NodeId node : nodes) {
    std::vector<ChatMessage> messages = node_prompt(pipeline, node, n_shots);
    const std::string text = prompt_text(messages);
    prompt_bytes[prompts.size()] = text.size();
    hash_input += text;
    hash_input += '\0';
    prompts.push_back(std::move(messages));
  }

  // samples > 1 repeats every prompt; results regroup per node below.
  std::vector<std::vector<ChatMessage>> dispatch;
  const std::size_t samples = static_cast<std::size_t>(config.samples);
  dispatch.reserve(prompts.size() * samples);
  for (const auto& prompt : prompts) {
    for (std::size_t s = 0; s < samples; ++s) dispatch.push_back(prompt);
  }

  Gateway gateway(make_backend(config.backend));
  std::vector<CompletionOutcome> outcomes = gateway.complete_batch(dispatch);

  if (config.reask_unparseable) {
    // One extra query per unparseable sample; off by default since an
    // unparseable reply already scores as incorrect.
    std::vector<std::size_t> retry_indices;
    std::vector<std::vector<ChatMessage>> retry_prompts;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (outcomes[i].error) continue;
      if (parse_answer(outcomes[i].text, pipeline.choices).status ==
          ParseStatus::unparseable) {
        retry_indices.push_back(i);
        retry_prompts.push_back(dispatch[i]);
      }
    }
    if (!retry_indices.empty()) {
      const std::vector<CompletionOutcome> retries =
          gateway.complete_batch(retry_prompts);
      for (std::size_t r = 0; r < retry_indices.size(); ++r) {
        if (!retries[r].error) {
          outcomes[retry_indices[r]].text = retries[r].text;
          outcomes[retry_indices[r]].latency_ms += retries[r].latency_ms;
        }
      }
    }
  }

  EvalReport report;
  report.config_snapshot = config.snapshot;
  report.config_snapshot["n_shots"] = n_shots;
  report.config_snapshot["style"] = style_name(pipeline.style);
  report.config_snapshot["hierarchy"] =
      pipeline.hierarchy == Hierarchy::attr_major ? "attr-major" : "rel-major";

  std::size_t unparseable = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    NodeRecord record;
    record.node = nodes[i];
    if (auto it = pipeline.graph.labels.find(nodes[i]);
        it != pipeline.graph.labels.end()) {
      record.gold = class_letter(it->second)[0];
    }
    record.prompt_bytes = prompt_bytes[i];

    std::vector<Prediction> sample_predictions;
    for (std::size_t s = 0; s < samples; ++s) {
      const CompletionOutcome& outcome = outcomes[i * samples + s];
      record.latency_ms += outcome.latency_ms;
      if (outcome.error) {
        record.error = outcome.error;
        report.partial = true;
        continue;
      }
      sample_predictions.push_back(parse_answer(outcome.text, pipeline.choices));
    }
    if (sample_predictions.empty()) {
      record.prediction.status = ParseStatus::unparseable;
    } else {
      record.prediction = majority_prediction(sample_predictions);
    }

    if (record.prediction.status == ParseStatus::unparseable) ++unparseable;
    if (record.gold && record.prediction.letter &&
        *record.prediction.letter == *record.gold) {
      ++report.correct;
    }
    report.total_prompt_bytes += record.prompt_bytes;
    report.total_latency_ms += record.latency_ms;
    report.records.push_back(std::move(record));
  }

  // Unparseable replies (no letter) simply never match the gold letter.
  report.evaluated = report.records.size();
  if (report.evaluated > 0) {
    report.accuracy =
        static_cast<double>(report.correct) / static_cast<double>(report.evaluated);
    report.unparseable_rate = static_cast<double>(unparseable) /
                              static_cast<double>(report.evaluated);
  }

  std::ostringstream hash;
  hash << std::hex << fnv1a64(hash_input);
  report.prompt_hash = hash.str();
  return report;
}

}  // namespace

Pipeline compile_pipeline(Graph graph, Split split, const RunConfig& config) {
  Pipeline pipeline;
  pipeline.choices = ChoiceMap::from_class_names(graph.class_names);
  pipeline.hierarchy = config.hierarchy;
  pipeline.style = config.style;

  for (const AttributeSpec& spec : config.attributes) {
    TextAttribute attr = build_attribute(graph, split, spec, config);
    const std::string display = spec.display.value_or(attr.name);
    pipeline.attribute_labels.push_back(make_label(display, spec.tag));
    pipeline.attributes.push_back(std::move(attr));
  }
  for (const RelationSpec& spec : config.relations) {
    RelationMatrix relation = build_relation(graph, spec, config);
    const std::string display = spec.display.value_or(relation.name);
    pipeline.relation_labels.push_back(make_label(display, spec.tag));
    if (spec.cap) {
      pipeline.caps[display] = *spec.cap;
    }
    pipeline.relations.push_back(std::move(relation));
  }

  PromptTemplate tmpl = builtin_template(config.template_id);
  if (config.system_override) tmpl.system = *config.system_override;
  if (config.demo_question_override) tmpl.demo_question = *config.demo_question_override;
  if (config.final_question_override) tmpl.final_question = *config.final_question_override;
  pipeline.tmpl = std::move(tmpl);

  if (config.per_class) {
    pipeline.demo_order =
        select_demonstrations(graph, split.train, config.n_shots, true);
    pipeline.per_class = true;
  } else {
    std::size_t labeled = 0;
    for (NodeId node : split.train) {
      if (graph.labels.contains(node)) ++labeled;
    }
    pipeline.demo_order = select_demonstrations(graph, split.train, labeled);
  }

  pipeline.graph = std::move(graph);
  pipeline.split = std::move(split);
  return pipeline;
}

std::string render_info_block(const Pipeline& pipeline, NodeId node,
                              RenderStyle style, Hierarchy hierarchy) {
  const EgoLists ego = build_ego_subgraph(node, pipeline.relations,
                                          pipeline.relation_labels, pipeline.caps);
  const SyntaxTree tree =
      build_tree(pipeline.attributes, pipeline.attribute_labels, ego, hierarchy);
  return render(tree, style);
}

std::string render_info_block(const Pipeline& pipeline, NodeId node) {
  return render_info_block(pipeline, node, pipeline.style, pipeline.hierarchy);
}

PromptBundle make_bundle(const Pipeline& pipeline, NodeId query,
                         std::size_t n_shots) {
  if (query >= pipeline.graph.node_count) {
    throw ValidationError("query node " + std::to_string(query) +
                          " out of range");
  }
  if (pipeline.per_class) {
    n_shots = pipeline.demo_order.size();  // n_shots was counted per class
  } else if (n_shots > pipeline.demo_order.size()) {
    throw ConfigError("n_shots=" + std::to_string(n_shots) + " exceeds the " +
                      std::to_string(pipeline.demo_order.size()) +
                      " available demonstrations");
  }
  PromptBundle bundle;
  bundle.tmpl = pipeline.tmpl;
  bundle.choices = pipeline.choices;
  for (std::size_t i = 0; i < n_shots; ++i) {
    const NodeId demo = pipeline.demo_order[i];
    Demonstration d;
    d.info_block = render_info_block(pipeline, demo);
    d.gold = class_letter(pipeline.graph.labels.at(demo))[0];
    bundle.demonstrations.push_back(std::move(d));
  }
  bundle.query_block = render_info_block(pipeline, query);
  return bundle;
}

std::vector<ChatMessage> node_prompt(const Pipeline& pipeline, NodeId query,
                                     std::size_t n_shots) {
  return assemble_prompt(make_bundle(pipeline, query, n_shots));
}

EvalReport run_eval(const Graph& graph, const Split& split,
                    const RunConfig& config) {
  const Pipeline pipeline = compile_pipeline(graph, split, config);
  return evaluate(pipeline, config, config.n_shots);
}

EvalReport run_eval(const RunConfig& config) {
  Graph graph = load_graph(config.graph_path);
  Split split = load_split(config.split_path, graph);
  return run_eval(graph, split, config);
}

std::vector<EvalReport> nshot_sweep(const Graph& graph, const Split& split,
                                    const RunConfig& config,
                                    const std::vector<std::size_t>& shots) {
  const Pipeline pipeline = compile_pipeline(graph, split, config);
  std::vector<EvalReport> reports;
  reports.reserve(shots.size());
  for (std::size_t n : shots) {
    reports.push_back(evaluate(pipeline, config, n));
  }
  return reports;
}

std::vector<std::pair<std::string, EvalReport>> ablation_sweep(
    const Graph& graph, const Split& split, const RunConfig& config) {
  Pipeline pipeline = compile_pipeline(graph, split, config);
  const std::vector<std::pair<std::string, std::pair<RenderStyle, Hierarchy>>>
      styles = {
          {"canonical", {RenderStyle::canonical_xml, Hierarchy::attr_major}},
          {"rev-hierarchy", {RenderStyle::canonical_xml, Hierarchy::rel_major}},
          {"no-internal", {RenderStyle::no_internal, Hierarchy::attr_major}},
          {"sequence", {RenderStyle::sequence, Hierarchy::attr_major}},
          {"set", {RenderStyle::set, Hierarchy::attr_major}},
      };
  std::vector<std::pair<std::string, EvalReport>> reports;
  for (const auto& [name, combo] : styles) {
    pipeline.style = combo.first;
    pipeline.hierarchy = combo.second;
    reports.emplace_back(name, evaluate(pipeline, config, config.n_shots));
  }
  return reports;
}

json report_to_json(const EvalReport& report) {
  json doc;
  doc["schema"] = 1;
  doc["config"] = report.config_snapshot;
  doc["accuracy"] = report.accuracy ? json(*report.accuracy) : json(nullptr);
  doc["unparseable_rate"] =
      report.unparseable_rate ? json(*report.unparseable_rate) : json(nullptr);
  doc["evaluated"] = report.evaluated;
  doc["correct"] = report.correct;
  doc["partial"] = report.partial;
  doc["prompt_hash"] = report.prompt_hash;
  doc["total_prompt_bytes"] = report.total_prompt_bytes;
  doc["total_latency_ms"] = report.total_latency_ms;
  json records = json::array();
  for (const NodeRecord& record : report.records) {
    json r;
    r["node_id"] = record.node;
    r["gold"] = record.gold ? json(std::string(1, *record.gold)) : json(nullptr);
    r["letter"] = record.prediction.letter
                      ? json(std::string(1, *record.prediction.letter))
                      : json(nullptr);
    r["status"] = parse_status_name(record.prediction.status);
    r["prompt_bytes"] = record.prompt_bytes;
    r["latency_ms"] = record.latency_ms;
    r["error"] = record.error ? json(*record.error) : json(nullptr);
    records.push_back(std::move(r));
  }
  doc["records"] = std::move(records);
  return doc;
}

std::string report_to_csv(const EvalReport& report) {
  std::string csv = "node_id,gold,letter,status,prompt_bytes,latency_ms\n";
  for (const NodeRecord& record : report.records) {
    csv += std::to_string(record.node);
    csv += ',';
    if (record.gold) csv += *record.gold;
    csv += ',';
    if (record.prediction.letter) csv += *record.prediction.letter;
    csv += ',';
    csv += parse_status_name(record.prediction.status);
    csv += ',';
    csv += std::to_string(record.prompt_bytes);
    csv += ',';
    std::ostringstream latency;
    latency << record.latency_ms;
    csv += latency.str();
    csv += '\n';
  }
  return csv;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace g2p
