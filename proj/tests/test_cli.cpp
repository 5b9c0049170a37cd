#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "g2p/evaluation.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string command = std::string(G2P_CLI_PATH) + " " + args +
                              (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buffer;
  std::size_t n = 0;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.out.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string data_path(const std::string& name) {
  return std::string(G2P_DATA_DIR) + "/" + name;
}

std::string config_path(const std::string& name) {
  return std::string(G2P_CONFIG_DIR) + "/" + name;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() /
                   ("g2p_cli_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate: clean files exit 0 with OK") {
  const RunResult result = run_cli("validate --graph " + data_path("synthetic.json") +
                                   " --split " + data_path("synthetic.split.json"));
  CHECK(result.exit_code == 0);
  CHECK(result.out == "OK\n");
}

TEST_CASE("validate: overlapping split exits 1 with a diagnostic") {
  TempDir dir;
  const fs::path bad = dir.path / "bad_split.json";
  std::ofstream(bad) << R"({"train": [0, 1], "test": [1]})";
  const RunResult result = run_cli(
      "validate --graph " + data_path("synthetic.json") + " --split " + bad.string(),
      /*merge_stderr=*/true);
  CHECK(result.exit_code == 1);
  CHECK(result.out.find("overlap") != std::string::npos);
}

TEST_CASE("validate: missing file exits 2") {
  const RunResult result = run_cli("validate --graph /nonexistent/graph.json");
  CHECK(result.exit_code == 2);
}

TEST_CASE("prompt output is byte-identical to the committed golden") {
  const RunResult result =
      run_cli("prompt --config " + config_path("citeseer_mini.json") + " --node 8");
  CHECK(result.exit_code == 0);
  CHECK(result.out == read_file(std::string(G2P_GOLDEN_DIR) + "/citeseer_icl_prompt.txt"));
}

TEST_CASE("prompt with the set style emits the sorted leaf block") {
  const RunResult result = run_cli("prompt --config " + config_path("cora_tiny.json") +
                                   " --node 0 --style set --shots 0");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("['A', 'G', 'A', 'E']\n['G']") != std::string::npos);
}

TEST_CASE("prompt on an unknown node exits 1") {
  const RunResult result =
      run_cli("prompt --config " + config_path("citeseer_mini.json") + " --node 99");
  CHECK(result.exit_code == 1);
}

TEST_CASE("prompt bytes equal the bytes eval sends for that node") {
  const RunResult prompt_result =
      run_cli("prompt --config " + config_path("synthetic_eval.json") + " --node 30");
  REQUIRE(prompt_result.exit_code == 0);

  g2p::RunConfig config = g2p::load_run_config(config_path("synthetic_eval.json"));
  config.eval_set.kind = g2p::EvalSetKind::nodes;
  config.eval_set.nodes = {30};
  const g2p::EvalReport report = g2p::run_eval(config);
  REQUIRE(report.records.size() == 1);
  CHECK(prompt_result.out.size() == report.records[0].prompt_bytes);

  const g2p::Graph graph = g2p::load_graph(config.graph_path);
  const g2p::Split split = g2p::load_split(config.split_path, graph);
  const g2p::Pipeline pipeline = g2p::compile_pipeline(graph, split, config);
  CHECK(prompt_result.out ==
        g2p::prompt_text(g2p::node_prompt(pipeline, 30, config.n_shots)));
}

TEST_CASE("classify prints the predicted class") {
  const RunResult result =
      run_cli("classify --config " + config_path("cora_tiny.json") + " --node 0");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("node 0: A: Theory [tag_parsed] gold=A") != std::string::npos);
}

TEST_CASE("eval writes reports whose accuracy matches the summary line") {
  TempDir dir;
  const RunResult result = run_cli("eval --config " + config_path("synthetic_eval.json") +
                                   " --out " + dir.path.string());
  CHECK(result.exit_code == 0);
  REQUIRE(fs::exists(dir.path / "report.json"));
  REQUIRE(fs::exists(dir.path / "report.csv"));

  const json report = json::parse(read_file(dir.path / "report.json"));
  const std::string needle = "accuracy: " + report["accuracy"].dump() + "\n";
  CHECK(result.out.find(needle) != std::string::npos);
  CHECK(report["records"].size() == 80);

  const std::string csv = read_file(dir.path / "report.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 81);  // header + 80 rows
}

TEST_CASE("backend overrides: ranked-list policy beats center-copy on the planted graph") {
  TempDir first_dir, center_dir;
  const RunResult first =
      run_cli("eval --config " + config_path("synthetic_eval.json") +
              " --backend mock:first-ppr --out " + first_dir.path.string());
  const RunResult center =
      run_cli("eval --config " + config_path("synthetic_eval.json") +
              " --backend mock:center --out " + center_dir.path.string());
  REQUIRE(first.exit_code == 0);
  REQUIRE(center.exit_code == 0);
  const double first_acc =
      json::parse(read_file(first_dir.path / "report.json"))["accuracy"].get<double>();
  const double center_acc =
      json::parse(read_file(center_dir.path / "report.json"))["accuracy"].get<double>();
  CHECK(first_acc > center_acc);
}

TEST_CASE("real backend without a credential exits 2 and writes nothing") {
  TempDir dir;
  const RunResult result = run_cli(
      "eval --config " + config_path("synthetic_eval.json") +
          " --backend http --set backend.credential_env=G2P_NO_SUCH_KEY --out " +
          dir.path.string(),
      /*merge_stderr=*/true);
  CHECK(result.exit_code == 2);
  CHECK(result.out.find("auth error") != std::string::npos);
  CHECK(!fs::exists(dir.path / "report.json"));
}

TEST_CASE("config overrides are type-checked") {
  const RunResult result = run_cli(
      "eval --config " + config_path("synthetic_eval.json") + " --set samples=maybe",
      /*merge_stderr=*/true);
  CHECK(result.exit_code == 1);
  CHECK(result.out.find("expected a value of type") != std::string::npos);

  const RunResult unknown = run_cli(
      "eval --config " + config_path("synthetic_eval.json") + " --set no.such.key=1",
      /*merge_stderr=*/true);
  CHECK(unknown.exit_code == 1);
}

TEST_CASE("sweep writes one report per shot count") {
  TempDir dir;
  const RunResult result = run_cli("sweep --config " + config_path("synthetic_eval.json") +
                                   " --shots 1,3 --out " + dir.path.string());
  CHECK(result.exit_code == 0);
  CHECK(fs::exists(dir.path / "report_1shot.json"));
  CHECK(fs::exists(dir.path / "report_3shot.json"));
  const std::size_t bytes_1 =
      json::parse(read_file(dir.path / "report_1shot.json"))["total_prompt_bytes"];
  const std::size_t bytes_3 =
      json::parse(read_file(dir.path / "report_3shot.json"))["total_prompt_bytes"];
  CHECK(bytes_1 < bytes_3);
}

TEST_CASE("ablate writes all five style reports with distinct hashes") {
  TempDir dir;
  // center-copy reads every rendering (tagless styles fall back to the
  // first leaf), so no style produces error records here.
  const RunResult result = run_cli("ablate --config " + config_path("synthetic_eval.json") +
                                   " --backend mock:center --out " + dir.path.string());
  CHECK(result.exit_code == 0);
  std::set<std::string> hashes;
  for (const char* style :
       {"canonical", "rev-hierarchy", "no-internal", "sequence", "set"}) {
    const fs::path report = dir.path / ("report_" + std::string(style) + ".json");
    REQUIRE(fs::exists(report));
    hashes.insert(json::parse(read_file(report))["prompt_hash"].get<std::string>());
  }
  CHECK(hashes.size() == 5);
}

TEST_CASE("interact: scripted session records the prediction flip") {
  TempDir dir;
  const fs::path transcript = dir.path / "transcript.jsonl";
  const fs::path config = dir.path / "interact.json";
  {
    json doc = json::parse(read_file(config_path("cora_tiny.json")));
    doc["graph"] = data_path("cora_tiny.json");
    doc["split"] = data_path("cora_tiny.split.json");
    doc["backend"] = {{"kind", "mock"},
                      {"policy", "script"},
                      {"replies",
                       {"The center node label is G.\n<answer>G</answer>",
                        "Re-ranking by ppr importance.\n<answer>A</answer>"}}};
    std::ofstream(config) << doc.dump();
  }
  const std::string stdin_file = (dir.path / "stdin.txt").string();
  std::ofstream(stdin_file)
      << "Note that PPR pseudo labels are ranked by importance; re-evaluate.\n"
      << "/quit\n";
  const RunResult result =
      run_cli("interact --config " + config.string() + " --node 0 --transcript " +
              transcript.string() + " < " + stdin_file);
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("[parsed] G (tag_parsed)") != std::string::npos);
  CHECK(result.out.find("[parsed] A (tag_parsed)") != std::string::npos);

  REQUIRE(fs::exists(transcript));
  std::ifstream lines(transcript);
  std::string line;
  std::size_t count = 0;
  std::size_t assistant = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++count;
    const json entry = json::parse(line);
    if (entry["role"] == "assistant") ++assistant;
  }
  CHECK(count == 5);  // system, user, assistant, user, assistant
  CHECK(assistant == 2);
}

TEST_CASE("interact: immediate /quit leaves a query-only transcript") {
  TempDir dir;
  const fs::path transcript = dir.path / "transcript.jsonl";
  const std::string stdin_file = (dir.path / "stdin.txt").string();
  std::ofstream(stdin_file) << "/quit\n";
  const RunResult result =
      run_cli("interact --config " + config_path("cora_tiny.json") + " --node 0 " +
              "--transcript " + transcript.string() + " < " + stdin_file);
  CHECK(result.exit_code == 0);
  std::ifstream lines(transcript);
  std::string line;
  std::size_t assistant = 0, user = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const json entry = json::parse(line);
    if (entry["role"] == "assistant") ++assistant;
    if (entry["role"] == "user") ++user;
  }
  CHECK(assistant == 1);
  CHECK(user == 1);
}

}  // TEST_SUITE
