#pragma once

#include <string>
#include <string_view>

namespace provgen {

struct PromptText {
  std::string text;
  std::string normalized;

  /// Lowercases and collapses whitespace; throws kInvalidArgument when the
  /// normalized form is empty.
  static PromptText from(std::string_view text);
};

}  // namespace provgen
