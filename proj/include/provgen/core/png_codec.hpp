#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "provgen/core/image.hpp"

namespace provgen {

struct DecodedRaster {
  Image image;
  std::optional<Plane> alpha;
};

// Presentation-only transcoding; PPM stays the canonical format.
std::vector<std::uint8_t> encode_png(const Image& image, const Plane* alpha = nullptr);
DecodedRaster decode_png(std::span<const std::uint8_t> bytes);

bool looks_like_png(std::span<const std::uint8_t> bytes);

}  // namespace provgen
