#pragma once

#include <array>

#include "provgen/core/image.hpp"

namespace provgen::attack {

using QuantTable = std::array<int, 64>;  // row-major

const QuantTable& standard_luma_table();
const QuantTable& standard_chroma_table();

/// Conventional quality scaling: 5000/q below 50, 200 - 2q otherwise;
/// entries (t * scale + 50) / 100 clamped to [1, 255].
QuantTable scaled_table(const QuantTable& base, int quality);

/// Baseline JPEG encode/decode without entropy coding: 8-bit samples,
/// 16-bit fixed-point BT.601 YCbCr, 4:4:4, single-precision AAN DCT,
/// round-half-even quantization and output rounding.
Image jpeg_roundtrip(const Image& image, int quality);

}  // namespace provgen::attack
