#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/core/digest.hpp"
#include "provgen/core/image.hpp"

namespace provgen::protector {

inline constexpr int kBlock = 8;
inline constexpr int kBandLo = 6;  // zig-zag indices, inclusive
inline constexpr int kBandHi = 14;
inline constexpr int kBandSlots = kBandHi - kBandLo + 1;
inline constexpr int kPayloadBits = 64;
inline constexpr double kRecoveryThreshold = 0.99;
inline constexpr double kDefaultAmplitude = 0.024;
inline constexpr std::string_view kPatternGenerator = "fisher-yates/mt19937_64";

struct WatermarkParams {
  int chips_per_bit = 0;  // 0 selects floor(slots / 64)
  double amplitude = kDefaultAmplitude;
};

struct WatermarkKey {
  std::uint64_t seed = 0;
  std::uint64_t payload = 0;
  int width = 0;   // frame the pattern was laid out on
  int height = 0;
  int chips_per_bit = 0;  // resolved
  double amplitude = 0;
};

/// Mid-band slots of a frame, counting partial edge blocks (reflect-padded).
int available_slots(int width, int height);

/// seed and payload are the first two 64-bit words of
/// HMAC-SHA256(salt, digest || timestamp_ms big-endian). Throws
/// kCapacityExceeded when chips_per_bit * 64 exceeds the slots.
WatermarkKey derive_key(const Digest& digest, std::int64_t timestamp_ms, std::string_view salt,
                        const WatermarkParams& params, int width, int height);

struct Chip {
  int block = 0;  // row-major over the padded block grid
  int coef = 0;   // zig-zag index in [kBandLo, kBandHi]
  int bit = 0;
  int sign = 1;
};

/// Chip j takes the j-th slot of a keyed permutation and carries bit j % 64.
std::vector<Chip> make_pattern(const WatermarkKey& key);

/// Pixel-domain luma pattern W (padded frame dimensions).
Plane watermark_signal(const WatermarkKey& key);

/// RMS of W per pixel.
double rms_perturbation(const WatermarkKey& key);

/// Adds W to every RGB channel (chroma unchanged) and clamps.
Image embed(const Image& image, const WatermarkKey& key);

struct ExtractionResult {
  double bit_accuracy = 0;
  bool recovered = false;
  int bits_scored = 0;
  std::uint64_t decoded = 0;
  std::array<double, kPayloadBits> correlation{};
  std::array<int, kPayloadBits> chips{};  // surviving chips per bit
};

/// Blind extraction. Throws kDimensionMismatch unless the image matches the
/// key's frame.
ExtractionResult extract(const Image& image, const WatermarkKey& key);

/// Extraction from a block-aligned sub-image at (offset_x, offset_y) of the
/// key's frame. Only blocks that survive whole are read; only bits with at
/// least one surviving chip are scored.
ExtractionResult extract_cropped(const Image& image, const WatermarkKey& key, int offset_x, int offset_y);

/// BT.601 luma, reflect-padded to whole blocks.
Plane luma_plane(const Image& image, int padded_width, int padded_height);

inline constexpr double kIdenticalPsnr = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) over all samples; identical images give +inf.
double psnr(const Image& a, const Image& b);

double squared_error(const Image& a, const Image& b);

/// Sum of squared sample differences plus alpha * R.
double protection_loss(const Image& original, const Image& protected_image, double recoverability_penalty,
                       double alpha);

/// Embedding salt from PROVGEN_WM_SALT, or a fixed development salt.
std::string watermark_salt();

}  // namespace provgen::protector
