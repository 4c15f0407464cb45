#include "provgen/core/prompt.hpp"

#include <cctype>

#include "provgen/core/error.hpp"

namespace provgen {

PromptText PromptText::from(std::string_view text) {
  PromptText p;
  p.text = std::string(text);
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !p.normalized.empty();
      continue;
    }
    if (pending_space) p.normalized.push_back(' ');
    pending_space = false;
    p.normalized.push_back(static_cast<char>(std::tolower(c)));
  }
  if (p.normalized.empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  return p;
}

}  // namespace provgen
