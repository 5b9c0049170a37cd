#pragma once

#include <optional>
#include <string>

#include "g2p/prompting.hpp"

namespace g2p {

enum class ParseStatus { tag_parsed, fallback_parsed, unparseable };

std::string parse_status_name(ParseStatus status);

struct Prediction {
  std::string raw;
  std::optional<char> letter;  // present iff status != unparseable
  ParseStatus status = ParseStatus::unparseable;
};

// Maps raw model text to a class prediction. The last <answer>...</answer>
// span whose trimmed content is a valid letter wins; otherwise the scan
// falls back to "X: Class Name" or a bare class name nearest the end.
// Letters are case-sensitive; class names are matched case-insensitively.
Prediction parse_answer(const std::string& raw, const ChoiceMap& choices);

}  // namespace g2p
