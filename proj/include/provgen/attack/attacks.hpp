#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

#include "provgen/core/image.hpp"

namespace provgen::attack {

/// i.i.d. N(0, sigma^2) per sample, clamped. Generator named by kNoiseGenerator.
Image gaussian_noise(const Image& image, double sigma, std::uint64_t seed);
inline constexpr std::string_view kNoiseGenerator = "mt19937_64/box-muller";

struct CropResult {
  Image image;
  int offset_x = 0;
  int offset_y = 0;
};

/// Side kept along one axis: the smallest multiple of 8 covering
/// dim * sqrt(1 - fraction), capped at dim.
int retained_side(int dim, double fraction);

/// Removes `fraction` of the area as a border band. The kept block-aligned
/// window sits at `anchor`, or is centered (offset floored to a block) when
/// no anchor is given.
CropResult crop(const Image& image, double fraction, std::optional<std::pair<int, int>> anchor = std::nullopt);

inline constexpr std::string_view kResizeKernel = "bilinear";

/// Bilinear resample to round(dim * factor).
Image resize(const Image& image, double factor);

enum class AttackKind { kNone, kJpeg, kNoise, kCrop, kResize };

struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  int quality = 0;
  double sigma = 0;
  std::uint64_t seed = 0;
  double fraction = 0;
  std::optional<std::pair<int, int>> anchor;
  double factor = 1;

  static AttackSpec none() { return {}; }
  static AttackSpec jpeg(int quality);
  static AttackSpec noise(double sigma, std::uint64_t seed);
  static AttackSpec crop_area(double fraction);
  static AttackSpec resize_by(double factor);

  /// Throws kInvalidArgument on out-of-range parameters.
  void validate() const;
  std::string name() const;   // "jpeg", "noise", ...
  std::string param() const;  // "70", "0.03", ...
};

nlohmann::json to_json(const AttackSpec& spec);
AttackSpec attack_from_json(const nlohmann::json& j);

}  // namespace provgen::attack
