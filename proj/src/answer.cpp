#include "g2p/answer.hpp"

#include <algorithm>
#include <cctype>

namespace g2p {

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

bool is_word_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) != 0;
}

bool standalone_at(const std::string& text, std::size_t pos, std::size_t len) {
  if (pos > 0 && is_word_char(text[pos - 1])) return false;
  const std::size_t after = pos + len;
  if (after < text.size() && is_word_char(text[after])) return false;
  return true;
}

bool iequals_at(const std::string& text, std::size_t pos, const std::string& needle) {
  if (pos + needle.size() > text.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
        std::tolower(static_cast<unsigned char>(needle[i]))) {
      return false;
    }
  }
  return true;
}

// Rightmost standalone case-insensitive occurrence of needle, or npos.
std::size_t rfind_standalone_ci(const std::string& text, const std::string& needle) {
  if (needle.empty() || needle.size() > text.size()) return std::string::npos;
  for (std::size_t pos = text.size() - needle.size() + 1; pos-- > 0;) {
    if (iequals_at(text, pos, needle) && standalone_at(text, pos, needle.size())) {
      return pos;
    }
  }
  return std::string::npos;
}

}  // namespace

std::string parse_status_name(ParseStatus status) {
  switch (status) {
    case ParseStatus::tag_parsed: return "tag_parsed";
    case ParseStatus::fallback_parsed: return "fallback_parsed";
    case ParseStatus::unparseable: return "unparseable";
  }
  return "unparseable";
}

Prediction parse_answer(const std::string& raw, const ChoiceMap& choices) {
  Prediction prediction;
  prediction.raw = raw;

  // Pass 1: the last <answer>...</answer> span with a valid letter.
  constexpr const char* kOpen = "<answer>";
  constexpr const char* kClose = "</answer>";
  const std::size_t open_len = 8;
  std::optional<char> tagged;
  for (std::size_t pos = raw.find(kOpen); pos != std::string::npos;
       pos = raw.find(kOpen, pos + 1)) {
    const std::size_t body = pos + open_len;
    const std::size_t close = raw.find(kClose, body);
    if (close == std::string::npos) break;
    const std::string content = trim(raw.substr(body, close - body));
    if (content.size() == 1 && choices.contains(content[0])) {
      tagged = content[0];
    }
  }
  if (tagged) {
    prediction.letter = *tagged;
    prediction.status = ParseStatus::tag_parsed;
    return prediction;
  }

  // Pass 2: "X: Class Name" or the bare class name, nearest the end.
  std::size_t best_pos = std::string::npos;
  char best_letter = 0;
  for (const auto& [letter, name] : choices.entries) {
    const std::string labeled = std::string(1, letter) + ": " + name;
    std::size_t pos = rfind_standalone_ci(raw, labeled);
    if (pos != std::string::npos && raw[pos] == letter) {  // letter stays case-sensitive
      if (best_pos == std::string::npos || pos > best_pos) {
        best_pos = pos;
        best_letter = letter;
      }
    }
    pos = rfind_standalone_ci(raw, name);
    if (pos != std::string::npos) {
      if (best_pos == std::string::npos || pos > best_pos) {
        best_pos = pos;
        best_letter = letter;
      }
    }
  }
  if (best_pos != std::string::npos) {
    prediction.letter = best_letter;
    prediction.status = ParseStatus::fallback_parsed;
    return prediction;
  }

  prediction.status = ParseStatus::unparseable;
  return prediction;
}

}  // namespace g2p
