#pragma once

#include <array>

namespace provgen::protector {

using Block = std::array<double, 64>;  // row-major 8x8

/// Orthonormal 2-D type-II DCT and its inverse.
Block dct8(const Block& x);
Block idct8(const Block& c);

/// Row-major position of zig-zag index k (0..63).
int zigzag_position(int k);

}  // namespace provgen::protector
