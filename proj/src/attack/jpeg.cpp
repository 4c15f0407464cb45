#include "provgen/attack/jpeg.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <string>

#include "provgen/core/error.hpp"

namespace provgen::attack {

namespace {

constexpr QuantTable kLuma{16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                           14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                           18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                           49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr QuantTable kChroma{17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                             24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
                             99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                             99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// Partial blocks repeat the last row and column.
int edge(int i, int n) { return std::min(i, n - 1); }

// Float AAN factorization in single precision, as in the reference codec's
// float path. Output is scaled by 8 * aan[u] * aan[v].
constexpr std::array<double, 8> kAanScale{1.0,         1.387039845, 1.306562965, 1.175875602,
                                          1.0,         0.785694958, 0.541196100, 0.275899379};

void fdct_row(float* d, int stride) {
  const float tmp0 = d[0] + d[7 * stride], tmp7 = d[0] - d[7 * stride];
  const float tmp1 = d[stride] + d[6 * stride], tmp6 = d[stride] - d[6 * stride];
  const float tmp2 = d[2 * stride] + d[5 * stride], tmp5 = d[2 * stride] - d[5 * stride];
  const float tmp3 = d[3 * stride] + d[4 * stride], tmp4 = d[3 * stride] - d[4 * stride];

  float tmp10 = tmp0 + tmp3, tmp13 = tmp0 - tmp3;
  float tmp11 = tmp1 + tmp2, tmp12 = tmp1 - tmp2;
  d[0] = tmp10 + tmp11;
  d[4 * stride] = tmp10 - tmp11;
  const float z1 = (tmp12 + tmp13) * 0.707106781f;
  d[2 * stride] = tmp13 + z1;
  d[6 * stride] = tmp13 - z1;

  tmp10 = tmp4 + tmp5;
  tmp11 = tmp5 + tmp6;
  tmp12 = tmp6 + tmp7;
  const float z5 = (tmp10 - tmp12) * 0.382683433f;
  const float z2 = 0.541196100f * tmp10 + z5;
  const float z4 = 1.306562965f * tmp12 + z5;
  const float z3 = tmp11 * 0.707106781f;
  const float z11 = tmp7 + z3, z13 = tmp7 - z3;
  d[5 * stride] = z13 + z2;
  d[3 * stride] = z13 - z2;
  d[stride] = z11 + z4;
  d[7 * stride] = z11 - z4;
}

// One inverse pass over eight dequantized inputs.
void idct_row(const float* in, int in_stride, float* out, int out_stride) {
  float tmp0 = in[0], tmp1 = in[2 * in_stride], tmp2 = in[4 * in_stride], tmp3 = in[6 * in_stride];
  float tmp10 = tmp0 + tmp2, tmp11 = tmp0 - tmp2;
  float tmp13 = tmp1 + tmp3;
  float tmp12 = (tmp1 - tmp3) * 1.414213562f - tmp13;
  tmp0 = tmp10 + tmp13;
  tmp3 = tmp10 - tmp13;
  tmp1 = tmp11 + tmp12;
  tmp2 = tmp11 - tmp12;

  float tmp4 = in[in_stride], tmp5 = in[3 * in_stride], tmp6 = in[5 * in_stride], tmp7 = in[7 * in_stride];
  const float z13 = tmp6 + tmp5, z10 = tmp6 - tmp5;
  const float z11 = tmp4 + tmp7, z12 = tmp4 - tmp7;
  tmp7 = z11 + z13;
  tmp11 = (z11 - z13) * 1.414213562f;
  const float z5 = (z10 + z12) * 1.847759065f;
  tmp10 = z5 - z12 * 1.082392200f;
  tmp12 = z5 - z10 * 2.613125930f;
  tmp6 = tmp12 - tmp7;
  tmp5 = tmp11 - tmp6;
  tmp4 = tmp10 - tmp5;

  out[0] = tmp0 + tmp7;
  out[7 * out_stride] = tmp0 - tmp7;
  out[out_stride] = tmp1 + tmp6;
  out[6 * out_stride] = tmp1 - tmp6;
  out[2 * out_stride] = tmp2 + tmp5;
  out[5 * out_stride] = tmp2 - tmp5;
  out[3 * out_stride] = tmp3 + tmp4;
  out[4 * out_stride] = tmp3 - tmp4;
}

// One plane of 8-bit samples through quantize/dequantize, in place.
void code_plane(std::vector<int>& plane, int pw, int ph, const QuantTable& q) {
  std::array<float, 64> divisor{}, multiplier{};
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      const double s = q[static_cast<std::size_t>(u * 8 + v)] * kAanScale[static_cast<std::size_t>(u)] *
                       kAanScale[static_cast<std::size_t>(v)];
      divisor[static_cast<std::size_t>(u * 8 + v)] = static_cast<float>(1.0 / (s * 8.0));
      multiplier[static_cast<std::size_t>(u * 8 + v)] = static_cast<float>(s * 0.125);
    }
  }
  std::array<float, 64> ws{};
  for (int by = 0; by < ph; by += 8) {
    for (int bx = 0; bx < pw; bx += 8) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          ws[static_cast<std::size_t>(y * 8 + x)] =
              static_cast<float>(plane[static_cast<std::size_t>((by + y) * pw + bx + x)] - 128);
        }
      }
      for (int r = 0; r < 8; ++r) fdct_row(&ws[static_cast<std::size_t>(r * 8)], 1);
      for (int c = 0; c < 8; ++c) fdct_row(&ws[static_cast<std::size_t>(c)], 8);
      // Round half to even in single precision, then dequantize.
      std::array<float, 64> coef{};
      for (std::size_t k = 0; k < 64; ++k) coef[k] = std::nearbyint(ws[k] * divisor[k]) * multiplier[k];
      std::array<float, 64> mid{};
      for (int c = 0; c < 8; ++c) idct_row(&coef[static_cast<std::size_t>(c)], 8, &mid[static_cast<std::size_t>(c)], 8);
      for (int r = 0; r < 8; ++r) {
        std::array<float, 8> row{};
        idct_row(&mid[static_cast<std::size_t>(r * 8)], 1, row.data(), 1);
        for (int x = 0; x < 8; ++x) {
          const float v = std::clamp(std::nearbyint(row[static_cast<std::size_t>(x)]), -128.0f, 127.0f);
          plane[static_cast<std::size_t>((by + r) * pw + bx + x)] = static_cast<int>(v) + 128;
        }
      }
    }
  }
}

// 16-bit fixed-point BT.601 conversions.
constexpr int kFixBits = 16;
constexpr std::int32_t fix(double x) { return static_cast<std::int32_t>(x * (1 << kFixBits) + 0.5); }
constexpr std::int32_t kHalf = 1 << (kFixBits - 1);
constexpr std::int32_t kChromaOffset = 128 << kFixBits;

int to_y(int r, int g, int b) { return (fix(0.29900) * r + fix(0.58700) * g + fix(0.11400) * b + kHalf) >> kFixBits; }
int to_cb(int r, int g, int b) {
  return (-fix(0.16874) * r - fix(0.33126) * g + fix(0.5) * b + kChromaOffset + kHalf - 1) >> kFixBits;
}
int to_cr(int r, int g, int b) {
  return (fix(0.5) * r - fix(0.41869) * g - fix(0.08131) * b + kChromaOffset + kHalf - 1) >> kFixBits;
}
int clamp8(int v) { return std::clamp(v, 0, 255); }

}  // namespace

const QuantTable& standard_luma_table() { return kLuma; }
const QuantTable& standard_chroma_table() { return kChroma; }

QuantTable scaled_table(const QuantTable& base, int quality) {
  if (quality < 1 || quality > 100) throw Error(ErrorCode::kInvalidArgument, "JPEG quality must lie in [1,100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  QuantTable out{};
  for (std::size_t k = 0; k < 64; ++k) out[k] = std::clamp((base[k] * scale + 50) / 100, 1, 255);
  return out;
}

Image jpeg_roundtrip(const Image& image, int quality) {
  const QuantTable ql = scaled_table(kLuma, quality);
  const QuantTable qc = scaled_table(kChroma, quality);
  const int w = image.width(), h = image.height();
  const int pw = (w + 7) / 8 * 8, ph = (h + 7) / 8 * 8;
  std::vector<int> y(static_cast<std::size_t>(pw) * ph), cb(y.size()), cr(y.size());
  for (int j = 0; j < ph; ++j) {
    const int sy = edge(j, h);
    for (int i = 0; i < pw; ++i) {
      const int sx = edge(i, w);
      const int r = quantize_sample(image.at(sx, sy, 0));
      const int g = quantize_sample(image.at(sx, sy, 1));
      const int b = quantize_sample(image.at(sx, sy, 2));
      const std::size_t k = static_cast<std::size_t>(j) * pw + i;
      y[k] = to_y(r, g, b);
      cb[k] = to_cb(r, g, b);
      cr[k] = to_cr(r, g, b);
    }
  }
  code_plane(y, pw, ph, ql);
  code_plane(cb, pw, ph, qc);
  code_plane(cr, pw, ph, qc);
  Image out(w, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * pw + i;
      const int yy = y[k], u = cb[k] - 128, v = cr[k] - 128;
      const int r = yy + ((fix(1.40200) * v + kHalf) >> kFixBits);
      const int g = yy + ((-fix(0.34414) * u + kHalf - fix(0.71414) * v) >> kFixBits);
      const int b = yy + ((fix(1.77200) * u + kHalf) >> kFixBits);
      out.at(i, j, 0) = static_cast<float>(clamp8(r) / 255.0);
      out.at(i, j, 1) = static_cast<float>(clamp8(g) / 255.0);
      out.at(i, j, 2) = static_cast<float>(clamp8(b) / 255.0);
    }
  }
  return out;
}

}  // namespace provgen::attack
