#include "g2p/run_config.hpp"

#include <fstream>

#include "g2p/errors.hpp"

namespace g2p {

using nlohmann::json;

namespace {

// Built-in defaults; also the type schema for override checking.
json default_config() {
  return json{
      {"graph", ""},
      {"split", ""},
      {"attributes", json::array()},
      {"relations", json::array()},
      {"hierarchy", "attr-major"},
      {"style", "canonical"},
      {"n_shots", 0},
      {"per_class", false},
      {"template", "citation"},
      {"question", json{{"system", nullptr}, {"demo", nullptr}, {"final", nullptr}}},
      {"backend", json{{"kind", "mock"},
                       {"policy", "fixed:A"},
                       {"replies", json::array()},
                       {"endpoint", "https://api.openai.com/v1/chat/completions"},
                       {"model", "gpt-3.5-turbo"},
                       {"temperature", 0.0},
                       {"max_tokens", 512},
                       {"timeout_seconds", 30.0},
                       {"max_attempts", 3},
                       {"backoff_base_seconds", 0.5},
                       {"requests_per_minute", 60.0},
                       {"parallel_requests", 1},
                       {"credential_env", "LLM_API_KEY"}}},
      {"eval_set", "test"},
      {"samples", 1},
      {"seed", 0},
      {"propagation", json{{"normalization", "row-stochastic"}, {"self_loops", true}}},
      {"ppr", json{{"alpha", 0.25}, {"top_k", 4}}},
      {"sim_top_k", 4},
      {"kmeans_k", nullptr},
      {"raw_text_max_chars", 500},
      {"reask_unparseable", false},
  };
}

void merge_defaults(json& doc, const json& defaults) {
  for (const auto& [key, value] : defaults.items()) {
    if (!doc.contains(key)) {
      doc[key] = value;
    } else if (value.is_object() && doc[key].is_object()) {
      merge_defaults(doc[key], value);
    }
  }
}

[[noreturn]] void bad(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  return obj[key].get<std::string>();
}

AttributeSpec parse_attribute(const json& item, const std::string& origin) {
  AttributeSpec spec;
  if (item.is_string()) {
    spec.name = item.get<std::string>();
    return spec;
  }
  if (!item.is_object() || !item.contains("name")) {
    bad(origin, "attribute entries must be a name string or {name, ...}");
  }
  spec.name = item["name"].get<std::string>();
  spec.display = optional_string(item, "display");
  spec.tag = optional_string(item, "tag");
  return spec;
}

RelationSpec parse_relation(const json& item, const std::string& origin) {
  RelationSpec spec;
  if (item.is_string()) {
    spec.name = item.get<std::string>();
    return spec;
  }
  if (!item.is_object() || !item.contains("name")) {
    bad(origin, "relation entries must be a name string or {name, ...}");
  }
  spec.name = item["name"].get<std::string>();
  spec.display = optional_string(item, "display");
  spec.tag = optional_string(item, "tag");
  if (item.contains("cap") && !item["cap"].is_null()) {
    spec.cap = item["cap"].get<std::size_t>();
    if (*spec.cap == 0) bad(origin, "relation caps must be positive");
  }
  if (item.contains("top_k") && !item["top_k"].is_null()) {
    spec.top_k = item["top_k"].get<std::size_t>();
  }
  return spec;
}

}  // namespace

RunConfig run_config_from_json(json doc, const std::string& origin) {
  if (!doc.is_object()) {
    bad(origin, "config must be a JSON object");
  }
  merge_defaults(doc, default_config());

  RunConfig config;
  config.graph_path = doc["graph"].get<std::string>();
  config.split_path = doc["split"].get<std::string>();

  for (const auto& item : doc["attributes"]) {
    config.attributes.push_back(parse_attribute(item, origin));
  }
  for (const auto& item : doc["relations"]) {
    config.relations.push_back(parse_relation(item, origin));
  }
  if (config.attributes.empty() || config.relations.empty()) {
    bad(origin, "at least one attribute and one relation are required");
  }

  const std::string hierarchy = doc["hierarchy"].get<std::string>();
  if (hierarchy == "attr-major") {
    config.hierarchy = Hierarchy::attr_major;
  } else if (hierarchy == "rel-major") {
    config.hierarchy = Hierarchy::rel_major;
  } else {
    bad(origin, "hierarchy must be attr-major or rel-major");
  }

  apply_style_name(config, doc["style"].get<std::string>());

  config.n_shots = doc["n_shots"].get<std::size_t>();
  config.per_class = doc["per_class"].get<bool>();
  config.template_id = doc["template"].get<std::string>();
  config.system_override = optional_string(doc["question"], "system");
  config.demo_question_override = optional_string(doc["question"], "demo");
  config.final_question_override = optional_string(doc["question"], "final");

  const json& backend = doc["backend"];
  const std::string kind = backend["kind"].get<std::string>();
  if (kind == "mock") {
    config.backend.mock = true;
    const std::string policy = backend["policy"].get<std::string>();
    if (policy == "script") {
      std::vector<std::string> replies;
      for (const auto& reply : backend["replies"]) {
        replies.push_back(reply.get<std::string>());
      }
      config.backend.policy = MockPolicy::script(std::move(replies));
    } else {
      config.backend.policy = MockPolicy::from_name(policy);
    }
  } else if (kind == "http") {
    config.backend.mock = false;
    LlmConfig& llm = config.backend.llm;
    llm.endpoint = backend["endpoint"].get<std::string>();
    llm.model = backend["model"].get<std::string>();
    llm.temperature = backend["temperature"].get<double>();
    llm.max_tokens = backend["max_tokens"].get<int>();
    llm.timeout_seconds = backend["timeout_seconds"].get<double>();
    llm.max_attempts = backend["max_attempts"].get<int>();
    llm.backoff_base_seconds = backend["backoff_base_seconds"].get<double>();
    llm.requests_per_minute = backend["requests_per_minute"].get<double>();
    llm.parallel_requests = backend["parallel_requests"].get<int>();
    llm.credential_env = backend["credential_env"].get<std::string>();
    if (llm.max_attempts < 1) bad(origin, "backend.max_attempts must be >= 1");
    if (llm.requests_per_minute <= 0) {
      bad(origin, "backend.requests_per_minute must be > 0");
    }
  } else {
    bad(origin, "backend.kind must be mock or http");
  }

  const json& eval_set = doc["eval_set"];
  if (eval_set.is_string()) {
    const std::string name = eval_set.get<std::string>();
    if (name == "val") {
      config.eval_set.kind = EvalSetKind::val;
    } else if (name == "test") {
      config.eval_set.kind = EvalSetKind::test;
    } else {
      bad(origin, "eval_set must be \"val\", \"test\" or {\"nodes\": [...]}");
    }
  } else if (eval_set.is_object() && eval_set.contains("nodes")) {
    config.eval_set.kind = EvalSetKind::nodes;
    for (const auto& id : eval_set["nodes"]) {
      config.eval_set.nodes.push_back(id.get<NodeId>());
    }
  } else {
    bad(origin, "eval_set must be \"val\", \"test\" or {\"nodes\": [...]}");
  }

  config.samples = doc["samples"].get<int>();
  if (config.samples < 1) bad(origin, "samples must be >= 1");
  config.seed = doc["seed"].get<std::uint64_t>();

  const json& prop = doc["propagation"];
  const std::string norm = prop["normalization"].get<std::string>();
  if (norm == "row-stochastic") {
    config.propagation.normalization = Normalization::row_stochastic;
  } else if (norm == "symmetric") {
    config.propagation.normalization = Normalization::symmetric;
  } else {
    bad(origin, "propagation.normalization must be row-stochastic or symmetric");
  }
  config.propagation.self_loops = prop["self_loops"].get<bool>();

  config.ppr_alpha = doc["ppr"]["alpha"].get<double>();
  config.ppr_top_k = doc["ppr"]["top_k"].get<std::size_t>();
  config.sim_top_k = doc["sim_top_k"].get<std::size_t>();
  if (!doc["kmeans_k"].is_null()) {
    config.kmeans_k = doc["kmeans_k"].get<int>();
  }
  config.raw_text_max_chars = doc["raw_text_max_chars"].get<std::size_t>();
  config.reask_unparseable = doc["reask_unparseable"].get<bool>();

  config.snapshot = std::move(doc);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return load_run_config(path, {});
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& ex) {
    throw FormatError(path.string() + ": " + ex.what());
  }
  for (const std::string& assignment : overrides) {
    apply_override(doc, assignment);
  }
  RunConfig config = run_config_from_json(std::move(doc), path.string());

  // Paths in the config resolve relative to the config file.
  const auto base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) {
      p = (base / p).string();
    }
  };
  resolve(config.graph_path);
  resolve(config.split_path);
  return config;
}

void apply_override(json& doc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override \"" + assignment + "\" is not dotted.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw_value = assignment.substr(eq + 1);

  json schema = default_config();
  json* node = &doc;
  const json* schema_node = &schema;
  std::size_t start = 0;
  std::vector<std::string> keys;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    keys.push_back(path.substr(start, dot == std::string::npos ? std::string::npos
                                                               : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& key = keys[i];
    if (schema_node != nullptr) {
      schema_node = schema_node->contains(key) ? &(*schema_node)[key] : nullptr;
    }
    if (schema_node == nullptr && !node->contains(key)) {
      throw ConfigError("override key \"" + path + "\" is not in the config schema");
    }
    if (i + 1 == keys.size()) {
      json value;
      try {
        value = json::parse(raw_value);
      } catch (const json::parse_error&) {
        value = raw_value;  // bare strings need no quoting
      }
      const json& reference = node->contains(key)
                                  ? (*node)[key]
                                  : (schema_node != nullptr ? *schema_node : value);
      const bool compatible = reference.is_null() || value.is_null() ||
                              (reference.is_number() && value.is_number()) ||
                              reference.type() == value.type();
      if (!compatible) {
        throw ConfigError("override \"" + path + "\": expected a value of type " +
                          std::string(reference.type_name()) + ", got " +
                          value.type_name());
      }
      (*node)[key] = std::move(value);
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) {
      if (schema_node != nullptr && schema_node->is_object()) {
        (*node)[key] = json::object();
      } else {
        throw ConfigError("override key \"" + path + "\" is not in the config schema");
      }
    }
    node = &(*node)[key];
  }
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
  if (spec.mock) {
    return std::make_unique<MockBackend>(spec.policy);
  }
  return std::make_unique<HttpBackend>(spec.llm);
}

void apply_style_name(RunConfig& config, const std::string& style) {
  if (style == "rev-hierarchy") {
    config.style = RenderStyle::canonical_xml;
    config.hierarchy = Hierarchy::rel_major;
  } else {
    config.style = parse_style(style);
  }
}

}  // namespace g2p
