// Command-line front end: validate data, dump prompts, classify nodes,
// run evaluations / n-shot sweeps / prompt-structure ablations, and host
// the interactive feedback REPL.
//
// Exit codes: 0 success, 1 domain error (validation, config, parsing),
// 2 system error (I/O, credentials, transport).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "g2p/errors.hpp"
#include "g2p/evaluation.hpp"
#include "g2p/gateway.hpp"
#include "g2p/graph.hpp"
#include "g2p/run_config.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string backend_override;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config_path, "Run configuration (JSON)")
      ->required();
  cmd->add_option("--set", options.overrides,
                  "Override a config value, dotted.key=value (repeatable)");
  cmd->add_option("--backend", options.backend_override,
                  "Backend override: mock:<policy> or http");
}

g2p::RunConfig load_config(const CommonOptions& options) {
  std::vector<std::string> overrides = options.overrides;
  if (!options.backend_override.empty()) {
    const std::string& name = options.backend_override;
    if (name.rfind("mock:", 0) == 0) {
      overrides.push_back("backend.kind=mock");
      overrides.push_back("backend.policy=" + name.substr(5));
    } else if (name == "http") {
      overrides.push_back("backend.kind=http");
    } else {
      throw g2p::ConfigError("--backend must be mock:<policy> or http");
    }
  }
  return g2p::load_run_config(options.config_path, overrides);
}

double json_number(const json& value) {
  return value.is_null() ? 0.0 : value.get<double>();
}

void write_report_files(const g2p::EvalReport& report, const fs::path& dir,
                        const std::string& stem) {
  fs::create_directories(dir);
  const fs::path json_path = dir / (stem + ".json");
  const fs::path csv_path = dir / (stem + ".csv");
  std::ofstream json_out(json_path);
  if (!json_out) throw g2p::IoError("cannot write " + json_path.string());
  json_out << g2p::report_to_json(report).dump(2) << "\n";
  std::ofstream csv_out(csv_path);
  if (!csv_out) throw g2p::IoError("cannot write " + csv_path.string());
  csv_out << g2p::report_to_csv(report);
  std::cout << "report: " << json_path.string() << "\n";
  std::cout << "records: " << csv_path.string() << "\n";
}

void print_summary(const g2p::EvalReport& report) {
  std::cout << "evaluated: " << report.evaluated << "\n";
  std::cout << "correct: " << report.correct << "\n";
  std::cout << "accuracy: "
            << (report.accuracy ? json(*report.accuracy).dump() : "null") << "\n";
  std::cout << "unparseable_rate: "
            << (report.unparseable_rate ? json(*report.unparseable_rate).dump()
                                        : "null")
            << "\n";
  if (report.partial) {
    std::cout << "partial: true\n";
  }
}

int cmd_validate(const std::string& graph_path, const std::string& split_path) {
  const g2p::Graph graph = g2p::load_graph(graph_path);
  if (!split_path.empty()) {
    (void)g2p::load_split(split_path, graph);
  }
  std::cout << "OK\n";
  return 0;
}

int cmd_prompt(const CommonOptions& options, g2p::NodeId node,
               const std::string& style, int shots) {
  g2p::RunConfig config = load_config(options);
  if (!style.empty()) g2p::apply_style_name(config, style);
  if (shots >= 0) config.n_shots = static_cast<std::size_t>(shots);
  const g2p::Graph graph = g2p::load_graph(config.graph_path);
  const g2p::Split split = g2p::load_split(config.split_path, graph);
  const g2p::Pipeline pipeline = g2p::compile_pipeline(graph, split, config);
  const auto messages = g2p::node_prompt(pipeline, node, config.n_shots);
  std::cout << g2p::prompt_text(messages);
  return 0;
}

int cmd_classify(const CommonOptions& options, g2p::NodeId node) {
  g2p::RunConfig config = load_config(options);
  config.eval_set.kind = g2p::EvalSetKind::nodes;
  config.eval_set.nodes = {node};
  const g2p::Graph graph = g2p::load_graph(config.graph_path);
  const g2p::Split split = g2p::load_split(config.split_path, graph);
  const g2p::EvalReport report = g2p::run_eval(graph, split, config);
  const g2p::NodeRecord& record = report.records.at(0);
  if (record.error) {
    std::cerr << "node " << node << ": backend error: " << *record.error << "\n";
    return 2;
  }
  std::cout << "node " << node << ": ";
  if (record.prediction.letter) {
    const char letter = *record.prediction.letter;
    std::cout << letter;
    const auto index = g2p::ChoiceMap::from_class_names(graph.class_names).index_of(letter);
    if (index) {
      std::cout << ": " << graph.class_names.at(static_cast<std::size_t>(*index));
    }
  } else {
    std::cout << "unparseable";
  }
  std::cout << " [" << g2p::parse_status_name(record.prediction.status) << "]";
  if (record.gold) {
    std::cout << " gold=" << *record.gold;
  }
  std::cout << "\n";
  return 0;
}

int cmd_eval(const CommonOptions& options) {
  const g2p::RunConfig config = load_config(options);
  const g2p::EvalReport report = g2p::run_eval(config);
  print_summary(report);
  write_report_files(report, options.out_dir, "report");
  return report.partial ? 2 : 0;
}

int cmd_sweep(const CommonOptions& options, const std::string& shots_csv) {
  const g2p::RunConfig config = load_config(options);
  std::vector<std::size_t> shots;
  std::stringstream stream(shots_csv);
  for (std::string part; std::getline(stream, part, ',');) {
    shots.push_back(std::stoul(part));
  }
  if (shots.empty()) throw g2p::ConfigError("--shots list is empty");

  const g2p::Graph graph = g2p::load_graph(config.graph_path);
  const g2p::Split split = g2p::load_split(config.split_path, graph);
  const auto reports = g2p::nshot_sweep(graph, split, config, shots);

  bool partial = false;
  std::cout << "shots\taccuracy\tprompt_bytes\n";
  for (std::size_t i = 0; i < shots.size(); ++i) {
    std::cout << shots[i] << "\t"
              << (reports[i].accuracy ? json(*reports[i].accuracy).dump() : "null")
              << "\t" << reports[i].total_prompt_bytes << "\n";
    write_report_files(reports[i], options.out_dir,
                       "report_" + std::to_string(shots[i]) + "shot");
    partial = partial || reports[i].partial;
  }
  return partial ? 2 : 0;
}

int cmd_ablate(const CommonOptions& options) {
  const g2p::RunConfig config = load_config(options);
  const g2p::Graph graph = g2p::load_graph(config.graph_path);
  const g2p::Split split = g2p::load_split(config.split_path, graph);
  const auto reports = g2p::ablation_sweep(graph, split, config);

  bool partial = false;
  std::cout << "style\taccuracy\tprompt_hash\n";
  for (const auto& [style, report] : reports) {
    std::cout << style << "\t"
              << (report.accuracy ? json(*report.accuracy).dump() : "null")
              << "\t" << report.prompt_hash << "\n";
    write_report_files(report, options.out_dir, "report_" + style);
    partial = partial || report.partial;
  }
  return partial ? 2 : 0;
}

void print_turn(const g2p::InteractiveSession::Turn& turn) {
  std::cout << "[assistant] " << turn.reply << "\n";
  std::cout << "[parsed] ";
  if (turn.parsed.letter) {
    std::cout << *turn.parsed.letter;
  } else {
    std::cout << "-";
  }
  std::cout << " (" << g2p::parse_status_name(turn.parsed.status) << ")\n";
}

int cmd_interact(const CommonOptions& options, g2p::NodeId node,
                 const std::string& transcript_path) {
  const g2p::RunConfig config = load_config(options);
  const g2p::Graph graph = g2p::load_graph(config.graph_path);
  const g2p::Split split = g2p::load_split(config.split_path, graph);
  const g2p::Pipeline pipeline = g2p::compile_pipeline(graph, split, config);
  const auto messages = g2p::node_prompt(pipeline, node, config.n_shots);

  std::ofstream transcript(transcript_path);
  if (!transcript) {
    throw g2p::IoError("cannot write " + transcript_path);
  }
  auto backend = g2p::make_backend(config.backend);
  g2p::InteractiveSession session(messages, *backend, pipeline.choices,
                                  &transcript);

  std::cout << g2p::prompt_text(messages) << "\n\n";
  try {
    print_turn(session.query());
  } catch (const g2p::Error& ex) {
    std::cerr << "query failed: " << ex.what() << " (use /retry or /quit)\n";
  }

  std::string line;
  while (true) {
    std::cout << "feedback> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (line == "/quit") break;
    if (line.empty()) {
      std::cerr << "enter feedback text, or /quit to end the session\n";
      continue;
    }
    try {
      if (line == "/retry") {
        print_turn(session.query());
      } else {
        print_turn(session.feedback(line));
      }
    } catch (const g2p::Error& ex) {
      std::cerr << "turn failed: " << ex.what() << "\n";
    }
  }
  std::cout << "transcript: " << transcript_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "graph2prompt: compile attributed graphs into multi-choice prompts, "
      "query chat models or deterministic mocks, and score the answers"};
  app.require_subcommand(1);

  std::string graph_path;
  std::string split_path;
  auto* validate = app.add_subcommand("validate", "Validate a graph file (and optional split)");
  validate->add_option("--graph", graph_path, "Graph JSON file")->required();
  validate->add_option("--split", split_path, "Split JSON file");

  CommonOptions prompt_options;
  g2p::NodeId prompt_node = 0;
  std::string prompt_style;
  int prompt_shots = -1;
  auto* prompt = app.add_subcommand("prompt", "Print the exact prompt for one node");
  add_common(prompt, prompt_options);
  prompt->add_option("--node", prompt_node, "Query node id")->required();
  prompt->add_option("--style", prompt_style,
                     "canonical | rev-hierarchy | no-internal | sequence | set "
                     "| legacy-colon");
  prompt->add_option("--shots", prompt_shots, "Demonstration count override");

  CommonOptions classify_options;
  g2p::NodeId classify_node = 0;
  auto* classify = app.add_subcommand("classify", "Classify a single node end to end");
  add_common(classify, classify_options);
  classify->add_option("--node", classify_node, "Query node id")->required();

  CommonOptions eval_options;
  auto* eval = app.add_subcommand("eval", "Evaluate the configured eval set");
  add_common(eval, eval_options);
  eval->add_option("--out", eval_options.out_dir, "Output directory");

  CommonOptions sweep_options;
  std::string sweep_shots = "1,3,5,10,15,20";
  auto* sweep = app.add_subcommand("sweep", "n-shot sweep");
  add_common(sweep, sweep_options);
  sweep->add_option("--shots", sweep_shots, "Comma-separated shot counts");
  sweep->add_option("--out", sweep_options.out_dir, "Output directory");

  CommonOptions ablate_options;
  auto* ablate = app.add_subcommand("ablate", "Run the five prompt-structure ablations");
  add_common(ablate, ablate_options);
  ablate->add_option("--out", ablate_options.out_dir, "Output directory");

  CommonOptions interact_options;
  g2p::NodeId interact_node = 0;
  std::string transcript_path = "transcript.jsonl";
  auto* interact = app.add_subcommand("interact", "Interactive feedback session");
  add_common(interact, interact_options);
  interact->add_option("--node", interact_node, "Query node id")->required();
  interact->add_option("--transcript", transcript_path, "Transcript JSONL path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(graph_path, split_path);
    if (prompt->parsed())
      return cmd_prompt(prompt_options, prompt_node, prompt_style, prompt_shots);
    if (classify->parsed()) return cmd_classify(classify_options, classify_node);
    if (eval->parsed()) return cmd_eval(eval_options);
    if (sweep->parsed()) return cmd_sweep(sweep_options, sweep_shots);
    if (ablate->parsed()) return cmd_ablate(ablate_options);
    if (interact->parsed())
      return cmd_interact(interact_options, interact_node, transcript_path);
  } catch (const g2p::IoError& ex) {
    std::cerr << "i/o error: " << ex.what() << "\n";
    return 2;
  } catch (const g2p::AuthError& ex) {
    std::cerr << "auth error: " << ex.what() << "\n";
    return 2;
  } catch (const g2p::GatewayError& ex) {
    std::cerr << "gateway error: " << ex.what() << "\n";
    return 2;
  } catch (const g2p::Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "unexpected error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
