#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "g2p/answer.hpp"
#include "g2p/prompting.hpp"

namespace g2p {

struct LlmConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 512;
  double timeout_seconds = 30.0;
  int max_attempts = 3;               // >= 1
  double backoff_base_seconds = 0.5;  // delay = base * 2^(attempt-1)
  double requests_per_minute = 60.0;  // > 0
  int parallel_requests = 1;
  std::string credential_env = "LLM_API_KEY";
};

// Deterministic offline policies. The ranked-list policies parse the
// rendered prompt itself, so they exercise the full compile-render path:
//   first_ppr    answers the first token of the ppr leaf verbatim;
//   majority_ppr answers the modal ppr token ("NA" never counts as a
//                label; ties go to the earliest-appearing token);
//   center_copy  answers the center-node token ("NA" or a missing token
//                falls back to the fixed letter "A").
// An empty ranked list falls back to "A" for every policy.
struct MockPolicy {
  enum class Kind { first_ppr, majority_ppr, center_copy, fixed, script };
  Kind kind = Kind::fixed;
  char fixed_letter = 'A';
  std::vector<std::string> replies;  // script only, nonempty

  static MockPolicy first_ppr();
  static MockPolicy majority_ppr();
  static MockPolicy center_copy();
  static MockPolicy fixed(char letter);
  static MockPolicy script(std::vector<std::string> replies);
  // "first-ppr" | "majority-ppr" | "center" | "fixed:X" | "script"
  static MockPolicy from_name(const std::string& name);
  std::string name() const;
};

// One leaf list extracted from a rendered information block, keyed by the
// '/'-joined path of enclosing tags ("" for tagless renderings).
struct LeafEntry {
  std::string path;
  std::vector<std::string> tokens;
};

// Leaf lists of the query block inside the final user message (the part
// after the last "Now let's answer the question below:" marker). Handles
// the xml, colon and tagless renderings.
std::vector<LeafEntry> read_query_leaves(const std::string& user_content);

// Sends the messages to an OpenAI-style chat-completions endpoint and
// returns the first choice's content. Retries 429/5xx/transport failures
// with exponential backoff; 401/403 and a missing credential are
// non-retryable AuthErrors raised before any further attempt.
std::string complete(const std::vector<ChatMessage>& messages,
                     const LlmConfig& config);

// Pure function of (messages, policy); the script policy indexes its
// replies by the number of assistant messages already present.
std::string mock_complete(const std::vector<ChatMessage>& messages,
                          const MockPolicy& policy);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
  virtual bool is_mock() const = 0;
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockPolicy policy) : policy_(std::move(policy)) {}
  std::string complete(const std::vector<ChatMessage>& messages) override {
    return mock_complete(messages, policy_);
  }
  bool is_mock() const override { return true; }
  const MockPolicy& policy() const { return policy_; }

 private:
  MockPolicy policy_;
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(LlmConfig config);
  std::string complete(const std::vector<ChatMessage>& messages) override;
  bool is_mock() const override { return false; }
  const LlmConfig& config() const { return config_; }

 private:
  LlmConfig config_;
};

// Enforces a minimum spacing of 60/rpm seconds between issued requests;
// shared by all workers of a Gateway.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute);
  void acquire();

 private:
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
  std::mutex mutex_;
};

struct CompletionOutcome {
  std::string text;
  double latency_ms = 0.0;
  std::optional<std::string> error;
};

// Batch dispatcher. Mock backends run inline and report zero latency so
// evaluation output stays byte-deterministic; HTTP backends run on a
// bounded worker pool behind the shared rate limiter.
class Gateway {
 public:
  explicit Gateway(std::unique_ptr<Backend> backend);
  std::vector<CompletionOutcome> complete_batch(
      const std::vector<std::vector<ChatMessage>>& prompts);
  Backend& backend() { return *backend_; }

 private:
  std::unique_ptr<Backend> backend_;
  std::unique_ptr<RateLimiter> limiter_;
  int parallelism_ = 1;
};

// Multi-turn session over a growing message list. Every appended message
// streams to the transcript sink as one JSONL object; assistant entries
// carry the parsed answer.
class InteractiveSession {
 public:
  struct Turn {
    std::string reply;
    Prediction parsed;
  };

  InteractiveSession(std::vector<ChatMessage> initial, Backend& backend,
                     ChoiceMap choices, std::ostream* transcript);

  // Sends the current message list and appends the assistant reply.
  Turn query();
  // Appends a user message and re-queries. Rejects empty lines and
  // feedback before the first successful query.
  Turn feedback(const std::string& line);

  bool has_query() const { return has_query_; }
  const std::vector<ChatMessage>& messages() const { return messages_; }

 private:
  void write_message(const ChatMessage& message,
                     const Prediction* parsed = nullptr);

  std::vector<ChatMessage> messages_;
  Backend& backend_;
  ChoiceMap choices_;
  std::ostream* transcript_;
  bool has_query_ = false;
  std::size_t written_ = 0;
};

// Rebuilds the message list from a transcript written by a session.
std::vector<ChatMessage> replay_transcript(std::istream& in);

}  // namespace g2p
