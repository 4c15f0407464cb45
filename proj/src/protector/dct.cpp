#include "provgen/protector/dct.hpp"

#include <cmath>
#include <numbers>

namespace provgen::protector {

namespace {

// basis[u][x] = c(u) cos((2x + 1) u pi / 16)
const std::array<std::array<double, 8>, 8>& basis() {
  static const auto table = [] {
    std::array<std::array<double, 8>, 8> t{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) t[u][x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return t;
  }();
  return table;
}

constexpr std::array<int, 64> kZigzag{
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

}  // namespace

Block dct8(const Block& x) {
  const auto& b = basis();
  Block tmp{}, out{};
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int k = 0; k < 8; ++k) s += b[u][k] * x[y * 8 + k];
      tmp[y * 8 + u] = s;
    }
  }
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int k = 0; k < 8; ++k) s += b[v][k] * tmp[k * 8 + u];
      out[v * 8 + u] = s;
    }
  }
  return out;
}

Block idct8(const Block& c) {
  const auto& b = basis();
  Block tmp{}, out{};
  for (int v = 0; v < 8; ++v) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += b[u][x] * c[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += b[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = s;
    }
  }
  return out;
}

int zigzag_position(int k) { return kZigzag[static_cast<std::size_t>(k)]; }

}  // namespace provgen::protector
