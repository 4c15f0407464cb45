#include "provgen/planner/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace provgen::planner {

namespace {

constexpr std::array<ColorTerm, 12> kColors{{
    {"red", 0.0},     {"orange", 30.0}, {"yellow", 60.0},  {"lime", 90.0},
    {"green", 120.0}, {"teal", 150.0},  {"cyan", 180.0},   {"azure", 210.0},
    {"blue", 240.0},  {"purple", 270.0}, {"magenta", 300.0}, {"pink", 330.0},
}};

constexpr std::array<std::string_view, 13> kEntities{
    "dragon", "castle", "tree", "house", "sun", "moon", "bird",
    "mountain", "boat", "cloud", "circle", "square", "star"};

constexpr std::array<std::string_view, 3> kSizes{"small", "medium", "large"};
constexpr std::array<std::string_view, 5> kPoses{"flying", "standing", "sitting", "swimming", "sleeping"};
constexpr std::array<std::string_view, 5> kStyles{"medieval", "ancient", "modern", "wooden", "stone"};

constexpr std::array<BackgroundPhrase, 3> kBackgrounds{{
    {"sunset", "orange"},
    {"night", "blue"},
    {"noon", "azure"},
}};

template <typename Range>
bool contains(const Range& r, std::string_view token) {
  return std::find(r.begin(), r.end(), token) != r.end();
}

}  // namespace

std::span<const ColorTerm> color_terms() { return kColors; }

std::optional<int> color_index(std::string_view name) {
  for (std::size_t i = 0; i < kColors.size(); ++i) {
    if (kColors[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

int hue_bin(double hue_degrees) {
  const double h = std::fmod(std::fmod(hue_degrees, 360.0) + 360.0, 360.0);
  return static_cast<int>(std::floor((h + kHueHalfWidth) / 30.0)) % 12;
}

std::span<const std::string_view> entity_nouns() { return kEntities; }
bool is_entity(std::string_view token) { return contains(kEntities, token); }
std::span<const std::string_view> size_words() { return kSizes; }
std::span<const std::string_view> pose_words() { return kPoses; }
std::span<const std::string_view> style_words() { return kStyles; }
bool is_pose(std::string_view token) { return contains(kPoses, token); }
bool is_style(std::string_view token) { return contains(kStyles, token); }

std::span<const BackgroundPhrase> background_phrases() { return kBackgrounds; }

std::optional<BackgroundPhrase> find_background(std::string_view word) {
  for (const auto& b : kBackgrounds) {
    if (b.word == word) return b;
  }
  return std::nullopt;
}

}  // namespace provgen::planner
