#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "provgen/core/image.hpp"

namespace provgen::generator {

struct Component {
  int subtask_id = 0;
  Image image;
  Plane alpha;  // same size as image, values in [0,1]
  std::uint64_t seed_used = 0;
  int attempt = 0;
  std::optional<double> score;
  std::string glyph;  // glyph actually rendered; empty when unknown (external)

  int width() const { return image.width(); }
  int height() const { return image.height(); }
};

struct GeneratorParams {
  int steps = 50;
  double guidance_scale = 7.5;
  int resolution = 128;
  std::string negative_prompt = "blurry, distorted, low quality";

  /// Throws kInvalidArgument on steps < 1, guidance <= 0 or resolution < 32.
  void validate() const;
};

nlohmann::json to_json(const GeneratorParams& params);

}  // namespace provgen::generator
