#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace provgen::planner {

// Controlled vocabulary of the grammar planner. Colors are hue-range tags:
// each covers [hue - 15, hue + 15) degrees.
struct ColorTerm {
  std::string_view name;
  double hue_degrees;
};

inline constexpr double kHueHalfWidth = 15.0;

std::span<const ColorTerm> color_terms();
std::optional<int> color_index(std::string_view name);
/// Hue-range bin of `hue_degrees` (0..11) in the color-term table.
int hue_bin(double hue_degrees);

/// Foreground entity nouns; the generator's glyph table covers every one.
std::span<const std::string_view> entity_nouns();
bool is_entity(std::string_view token);

std::span<const std::string_view> size_words();  // small, medium, large
std::span<const std::string_view> pose_words();
std::span<const std::string_view> style_words();
bool is_pose(std::string_view token);
bool is_style(std::string_view token);

struct BackgroundPhrase {
  std::string_view word;       // follows "at"
  std::string_view color_tag;  // dominant hue tag of the rendered sky
};
std::span<const BackgroundPhrase> background_phrases();
std::optional<BackgroundPhrase> find_background(std::string_view word);

inline constexpr std::string_view kSkyEntity = "sky";
inline constexpr std::string_view kNeutralBackdrop = "backdrop";

}  // namespace provgen::planner
