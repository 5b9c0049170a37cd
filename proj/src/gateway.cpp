#include "g2p/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "g2p/attributes.hpp"
#include "g2p/errors.hpp"

namespace g2p {

using nlohmann::json;

namespace {

constexpr const char* kQueryMarker = "Now let's answer the question below:";

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

std::vector<std::string> parse_bracket_list(const std::string& text,
                                            std::size_t open) {
  std::vector<std::string> tokens;
  std::size_t pos = open + 1;
  while (pos < text.size() && text[pos] != ']') {
    if (text[pos] == '\'') {
      std::string token;
      ++pos;
      while (pos < text.size() && text[pos] != '\'') {
        if (text[pos] == '\\' && pos + 1 < text.size() && text[pos + 1] == '\'') {
          token += '\'';
          pos += 2;
        } else {
          token += text[pos++];
        }
      }
      ++pos;  // closing quote
      tokens.push_back(std::move(token));
    } else {
      ++pos;
    }
  }
  return tokens;
}

std::string join_path(const std::vector<std::string>& stack,
                      const std::string& leaf_tag) {
  std::string path;
  for (const auto& part : stack) {
    path += part;
    path += '/';
  }
  path += leaf_tag;
  return path;
}

std::string lowercase(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return text;
}

const LeafEntry* find_leaf(const std::vector<LeafEntry>& leaves,
                           const std::string& needle) {
  for (const LeafEntry& leaf : leaves) {
    if (lowercase(leaf.path).find(needle) != std::string::npos) return &leaf;
  }
  return nullptr;
}

std::string wrap_answer(const std::string& rationale, const std::string& letter) {
  return rationale + "\n<answer>" + letter + "</answer>";
}

// endpoint -> (origin, path) for httplib.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint \"" + endpoint + "\" has no scheme");
  }
  const std::size_t slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) {
    return {endpoint, "/"};
  }
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

MockPolicy MockPolicy::first_ppr() { return {Kind::first_ppr, 'A', {}}; }
MockPolicy MockPolicy::majority_ppr() { return {Kind::majority_ppr, 'A', {}}; }
MockPolicy MockPolicy::center_copy() { return {Kind::center_copy, 'A', {}}; }

MockPolicy MockPolicy::fixed(char letter) {
  if (letter < 'A' || letter > 'Z') {
    throw ConfigError("fixed mock policy needs an uppercase letter");
  }
  return {Kind::fixed, letter, {}};
}

MockPolicy MockPolicy::script(std::vector<std::string> replies) {
  if (replies.empty()) {
    throw ConfigError("script mock policy needs at least one reply");
  }
  return {Kind::script, 'A', std::move(replies)};
}

MockPolicy MockPolicy::from_name(const std::string& name) {
  if (name == "first-ppr") return first_ppr();
  if (name == "majority-ppr") return majority_ppr();
  if (name == "center") return center_copy();
  if (name.rfind("fixed:", 0) == 0 && name.size() == 7) return fixed(name[6]);
  throw ConfigError("unknown mock policy \"" + name +
                    "\" (expected first-ppr, majority-ppr, center, fixed:X "
                    "or a script policy from the config file)");
}

std::string MockPolicy::name() const {
  switch (kind) {
    case Kind::first_ppr: return "first-ppr";
    case Kind::majority_ppr: return "majority-ppr";
    case Kind::center_copy: return "center";
    case Kind::fixed: return std::string("fixed:") + fixed_letter;
    case Kind::script: return "script";
  }
  return "fixed:A";
}

std::vector<LeafEntry> read_query_leaves(const std::string& user_content) {
  std::string block = user_content;
  if (const std::size_t marker = user_content.rfind(kQueryMarker);
      marker != std::string::npos) {
    block = user_content.substr(marker + std::string(kQueryMarker).size());
  }

  std::vector<LeafEntry> leaves;
  std::vector<std::string> stack;
  std::string colon_context;

  std::size_t line_start = 0;
  while (line_start <= block.size()) {
    const std::size_t line_end = block.find('\n', line_start);
    std::string line = trim(
        block.substr(line_start, line_end == std::string::npos
                                     ? std::string::npos
                                     : line_end - line_start));
    line_start = (line_end == std::string::npos) ? block.size() + 1 : line_end + 1;
    if (line.empty()) continue;

    if (line.rfind("</", 0) == 0) {
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    if (line[0] == '<') {
      const std::size_t close = line.find('>');
      if (close == std::string::npos) continue;
      const std::string tag = line.substr(1, close - 1);
      const std::size_t bracket = line.find('[', close);
      if (bracket != std::string::npos) {
        leaves.push_back({join_path(stack, tag), parse_bracket_list(line, bracket)});
      } else if (line.find("</", close) == std::string::npos) {
        stack.push_back(tag);
      }
      continue;
    }
    if (line[0] == '[') {
      leaves.push_back({"", parse_bracket_list(line, 0)});
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon != std::string::npos) {
      const std::string tag = trim(line.substr(0, colon));
      const std::size_t bracket = line.find('[', colon);
      if (bracket != std::string::npos) {
        std::string path = colon_context.empty() ? tag : colon_context + "/" + tag;
        leaves.push_back({std::move(path), parse_bracket_list(line, bracket)});
      } else if (colon == line.size() - 1) {
        colon_context = tag;
      }
    }
  }
  return leaves;
}

std::string mock_complete(const std::vector<ChatMessage>& messages,
                          const MockPolicy& policy) {
  if (policy.kind == MockPolicy::Kind::fixed) {
    return wrap_answer(std::string("Answering the fixed choice ") + policy.fixed_letter + ".",
                       std::string(1, policy.fixed_letter));
  }
  if (policy.kind == MockPolicy::Kind::script) {
    std::size_t turn = 0;
    for (const ChatMessage& message : messages) {
      if (message.role == "assistant") ++turn;
    }
    return policy.replies[std::min(turn, policy.replies.size() - 1)];
  }

  const ChatMessage* last_user = nullptr;
  for (const ChatMessage& message : messages) {
    if (message.role == "user") last_user = &message;
  }
  if (last_user == nullptr) {
    throw ConfigError("mock policy needs a user message to read");
  }
  const std::vector<LeafEntry> leaves = read_query_leaves(last_user->content);

  if (policy.kind == MockPolicy::Kind::center_copy) {
    const LeafEntry* leaf = find_leaf(leaves, "center");
    if (leaf == nullptr && !leaves.empty() && leaves.front().path.empty()) {
      leaf = &leaves.front();  // tagless rendering: first leaf is the center
    }
    if (leaf == nullptr) {
      throw ConfigError("query block has no center-node leaf");
    }
    std::string token =
        leaf->tokens.empty() ? std::string(kMissingToken) : leaf->tokens.front();
    if (token == kMissingToken) token = "A";
    return wrap_answer("The center node label is " + token + ".", token);
  }

  const LeafEntry* ppr = find_leaf(leaves, "ppr");
  if (ppr == nullptr) {
    throw ConfigError("query block has no ppr leaf");
  }
  if (policy.kind == MockPolicy::Kind::first_ppr) {
    const std::string token = ppr->tokens.empty() ? "A" : ppr->tokens.front();
    return wrap_answer("The first ppr label is " + token + ".", token);
  }

  // majority_ppr
  std::vector<std::pair<std::string, int>> counts;  // first-appearance order
  for (const std::string& token : ppr->tokens) {
    if (token == kMissingToken) continue;
    auto it = std::find_if(counts.begin(), counts.end(),
                           [&](const auto& kv) { return kv.first == token; });
    if (it == counts.end()) {
      counts.emplace_back(token, 1);
    } else {
      it->second++;
    }
  }
  std::string token = "A";
  int best = 0;
  for (const auto& [candidate, count] : counts) {
    if (count > best) {
      best = count;
      token = candidate;
    }
  }
  return wrap_answer("Counting ppr labels, " + token + " is the most frequent.",
                     token);
}

HttpBackend::HttpBackend(LlmConfig config) : config_(std::move(config)) {
  if (config_.max_attempts < 1) {
    throw ConfigError("llm config: max_attempts must be >= 1");
  }
  if (config_.requests_per_minute <= 0.0) {
    throw ConfigError("llm config: requests_per_minute must be > 0");
  }
  const char* credential = std::getenv(config_.credential_env.c_str());
  if (credential == nullptr || *credential == '\0') {
    throw AuthError("credential environment variable " + config_.credential_env +
                    " is not set");
  }
}

std::string complete(const std::vector<ChatMessage>& messages,
                     const LlmConfig& config) {
  const char* credential = std::getenv(config.credential_env.c_str());
  if (credential == nullptr || *credential == '\0') {
    throw AuthError("credential environment variable " + config.credential_env +
                    " is not set");
  }

  json body;
  body["model"] = config.model;
  json msgs = json::array();
  for (const ChatMessage& message : messages) {
    msgs.push_back({{"role", message.role}, {"content", message.content}});
  }
  body["messages"] = std::move(msgs);
  body["temperature"] = config.temperature;
  body["max_tokens"] = config.max_tokens;
  const std::string payload = body.dump();

  const auto [origin, path] = split_endpoint(config.endpoint);

  std::string last_error;
  for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double delay =
          config.backoff_base_seconds * std::pow(2.0, attempt - 2);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }

    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::duration<double>(config.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(config.timeout_seconds));
    httplib::Headers headers{
        {"Authorization", std::string("Bearer ") + credential}};
    auto result = client.Post(path, headers, payload, "application/json");

    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 401 || result->status == 403) {
      throw AuthError("endpoint rejected the credential (HTTP " +
                      std::to_string(result->status) + ")");
    }
    if (retryable_status(result->status)) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw GatewayError("HTTP " + std::to_string(result->status) + " from " +
                         config.endpoint);
    }

    json reply;
    try {
      reply = json::parse(result->body);
    } catch (const json::parse_error& ex) {
      throw MalformedResponseError(std::string("response body is not JSON: ") +
                                   ex.what());
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() ||
        !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string()) {
      throw MalformedResponseError(
          "response body lacks choices[0].message.content");
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
  }
  throw GatewayError("request failed after " +
                     std::to_string(config.max_attempts) + " attempts (" +
                     last_error + ")");
}

std::string HttpBackend::complete(const std::vector<ChatMessage>& messages) {
  return g2p::complete(messages, config_);
}

RateLimiter::RateLimiter(double requests_per_minute)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(60.0 / requests_per_minute))),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

Gateway::Gateway(std::unique_ptr<Backend> backend)
    : backend_(std::move(backend)) {
  if (auto* http = dynamic_cast<HttpBackend*>(backend_.get())) {
    parallelism_ = std::max(1, http->config().parallel_requests);
    limiter_ = std::make_unique<RateLimiter>(http->config().requests_per_minute);
  }
}

std::vector<CompletionOutcome> Gateway::complete_batch(
    const std::vector<std::vector<ChatMessage>>& prompts) {
  std::vector<CompletionOutcome> outcomes(prompts.size());

  if (backend_->is_mock()) {
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      try {
        outcomes[i].text = backend_->complete(prompts[i]);
      } catch (const Error& ex) {
        outcomes[i].error = ex.what();
      }
    }
    return outcomes;
  }

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= prompts.size()) return;
      limiter_->acquire();
      const auto start = std::chrono::steady_clock::now();
      try {
        outcomes[i].text = backend_->complete(prompts[i]);
      } catch (const Error& ex) {
        outcomes[i].error = ex.what();
      }
      outcomes[i].latency_ms =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - start)
              .count();
    }
  };

  std::vector<std::thread> pool;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(parallelism_), prompts.size());
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return outcomes;
}

InteractiveSession::InteractiveSession(std::vector<ChatMessage> initial,
                                       Backend& backend, ChoiceMap choices,
                                       std::ostream* transcript)
    : messages_(std::move(initial)),
      backend_(backend),
      choices_(std::move(choices)),
      transcript_(transcript) {}

void InteractiveSession::write_message(const ChatMessage& message,
                                       const Prediction* parsed) {
  if (transcript_ == nullptr) return;
  json line{{"role", message.role}, {"content", message.content}};
  if (parsed != nullptr) {
    line["status"] = parse_status_name(parsed->status);
    if (parsed->letter) line["letter"] = std::string(1, *parsed->letter);
  }
  (*transcript_) << line.dump() << "\n";
  transcript_->flush();
}

InteractiveSession::Turn InteractiveSession::query() {
  const std::string reply = backend_.complete(messages_);
  // Flush any messages not yet written (the initial prompt on first query).
  for (; written_ < messages_.size(); ++written_) {
    write_message(messages_[written_]);
  }
  Turn turn{reply, parse_answer(reply, choices_)};
  messages_.push_back({"assistant", reply});
  write_message(messages_.back(), &turn.parsed);
  ++written_;
  has_query_ = true;
  return turn;
}

InteractiveSession::Turn InteractiveSession::feedback(const std::string& line) {
  if (trim(line).empty()) {
    throw ConfigError("empty feedback line");
  }
  if (!has_query_) {
    throw ConfigError("no query answered yet; run the query before feedback");
  }
  messages_.push_back({"user", line});
  try {
    return query();
  } catch (...) {
    // Per-turn failure: retract the feedback message so a retry is clean.
    messages_.pop_back();
    throw;
  }
}

std::vector<ChatMessage> replay_transcript(std::istream& in) {
  std::vector<ChatMessage> messages;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::parse_error& ex) {
      throw FormatError(std::string("transcript line is not JSON: ") + ex.what());
    }
    if (!entry.contains("role") || !entry.contains("content")) {
      throw FormatError("transcript line lacks role/content");
    }
    messages.push_back({entry["role"].get<std::string>(),
                        entry["content"].get<std::string>()});
  }
  return messages;
}

}  // namespace g2p
