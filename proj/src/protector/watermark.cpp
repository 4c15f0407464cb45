#include "provgen/protector/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <optional>

#include "provgen/core/error.hpp"
#include "provgen/core/rng.hpp"
#include "provgen/protector/dct.hpp"

namespace provgen::protector {

namespace {

int blocks_along(int n) { return (n + kBlock - 1) / kBlock; }

std::uint64_t read_be64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

int reflect(int i, int n) {
  if (i < n) return i;
  return std::max(0, 2 * n - 2 - i);
}

void require_same_size(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "images differ in size: " + std::to_string(a.width()) + "x" +
                                                   std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                                   "x" + std::to_string(b.height()));
  }
}

}  // namespace

int available_slots(int width, int height) { return blocks_along(width) * blocks_along(height) * kBandSlots; }

WatermarkKey derive_key(const Digest& digest, std::int64_t timestamp_ms, std::string_view salt,
                        const WatermarkParams& params, int width, int height) {
  if (width < Image::kMinSide || height < Image::kMinSide) {
    throw Error(ErrorCode::kInvalidArgument, "watermark frame too small");
  }
  if (!(params.amplitude >= 0.0) || !std::isfinite(params.amplitude)) {
    throw Error(ErrorCode::kInvalidArgument, "amplitude must be finite and non-negative");
  }
  if (params.chips_per_bit < 0) throw Error(ErrorCode::kInvalidArgument, "chips_per_bit must be non-negative");
  const int slots = available_slots(width, height);
  const int cpb = params.chips_per_bit > 0 ? params.chips_per_bit : slots / kPayloadBits;
  if (cpb < 1 || static_cast<long long>(cpb) * kPayloadBits > slots) {
    throw Error(ErrorCode::kCapacityExceeded, std::to_string(std::max(cpb, 1)) + " chips per bit need " +
                                                  std::to_string(std::max(cpb, 1) * kPayloadBits) + " slots, frame has " +
                                                  std::to_string(slots));
  }
  std::vector<std::uint8_t> message(digest.begin(), digest.end());
  for (int i = 7; i >= 0; --i) message.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(timestamp_ms) >> (8 * i)));
  const auto* s = reinterpret_cast<const std::uint8_t*>(salt.data());
  const Digest mac = hmac_sha256({s, salt.size()}, message);
  WatermarkKey key;
  key.seed = read_be64(mac.data());
  key.payload = read_be64(mac.data() + 8);
  key.width = width;
  key.height = height;
  key.chips_per_bit = cpb;
  key.amplitude = params.amplitude;
  return key;
}

std::vector<Chip> make_pattern(const WatermarkKey& key) {
  const int slots = available_slots(key.width, key.height);
  const int n = key.chips_per_bit * kPayloadBits;
  if (key.chips_per_bit < 1 || n > slots) throw Error(ErrorCode::kCapacityExceeded, "pattern exceeds frame capacity");
  std::vector<int> perm(static_cast<std::size_t>(slots));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(key.seed);
  std::vector<Chip> chips(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(slots - j)));
    std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pick)]);
    const int slot = perm[static_cast<std::size_t>(j)];
    chips[static_cast<std::size_t>(j)] = {slot / kBandSlots, kBandLo + slot % kBandSlots, j % kPayloadBits,
                                          (rng.next() >> 63) ? 1 : -1};
  }
  return chips;
}

Plane watermark_signal(const WatermarkKey& key) {
  const int bx = blocks_along(key.width), by = blocks_along(key.height);
  Plane w(bx * kBlock, by * kBlock, 0.0);
  std::vector<Block> coeffs(static_cast<std::size_t>(bx) * by, Block{});
  for (const Chip& c : make_pattern(key)) {
    const double bit = ((key.payload >> c.bit) & 1u) ? 1.0 : -1.0;
    coeffs[static_cast<std::size_t>(c.block)][static_cast<std::size_t>(zigzag_position(c.coef))] +=
        key.amplitude * c.sign * bit;
  }
  for (int b = 0; b < bx * by; ++b) {
    const Block spatial = idct8(coeffs[static_cast<std::size_t>(b)]);
    const int x0 = (b % bx) * kBlock, y0 = (b / bx) * kBlock;
    for (int y = 0; y < kBlock; ++y) {
      for (int x = 0; x < kBlock; ++x) w.at(x0 + x, y0 + y) = spatial[static_cast<std::size_t>(y * kBlock + x)];
    }
  }
  return w;
}

double rms_perturbation(const WatermarkKey& key) {
  const double chips = static_cast<double>(key.chips_per_bit) * kPayloadBits;
  const double pixels = static_cast<double>(blocks_along(key.width) * kBlock) * blocks_along(key.height) * kBlock;
  return key.amplitude * std::sqrt(chips / pixels);
}

Image embed(const Image& image, const WatermarkKey& key) {
  if (image.width() != key.width || image.height() != key.height) {
    throw Error(ErrorCode::kDimensionMismatch, "key frame does not match the image");
  }
  Image out = image;
  if (key.amplitude == 0.0) return out;
  const Plane w = watermark_signal(key);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double d = w.at(x, y);
      for (int c = 0; c < Image::kChannels; ++c) out.at(x, y, c) = static_cast<float>(image.at(x, y, c) + d);
    }
  }
  out.clamp();
  return out;
}

Plane luma_plane(const Image& image, int pw, int ph) {
  Plane y(pw, ph);
  for (int j = 0; j < ph; ++j) {
    const int sy = reflect(j, image.height());
    for (int i = 0; i < pw; ++i) {
      const int sx = reflect(i, image.width());
      y.at(i, j) = 0.299 * image.at(sx, sy, 0) + 0.587 * image.at(sx, sy, 1) + 0.114 * image.at(sx, sy, 2);
    }
  }
  return y;
}

namespace {

ExtractionResult decide(const WatermarkKey& key, const std::array<double, kPayloadBits>& corr,
                        const std::array<int, kPayloadBits>& chips) {
  ExtractionResult r;
  r.correlation = corr;
  r.chips = chips;
  int correct = 0;
  for (int b = 0; b < kPayloadBits; ++b) {
    const bool one = corr[static_cast<std::size_t>(b)] > 0.0;
    if (one) r.decoded |= (std::uint64_t{1} << b);
    if (chips[static_cast<std::size_t>(b)] == 0) continue;
    ++r.bits_scored;
    if (one == (((key.payload >> b) & 1u) != 0)) ++correct;
  }
  r.bit_accuracy = r.bits_scored > 0 ? static_cast<double>(correct) / r.bits_scored : 0.0;
  r.recovered = r.bit_accuracy >= kRecoveryThreshold;
  return r;
}

}  // namespace

ExtractionResult extract(const Image& image, const WatermarkKey& key) {
  if (image.width() != key.width || image.height() != key.height) {
    throw Error(ErrorCode::kDimensionMismatch, "image is " + std::to_string(image.width()) + "x" +
                                                   std::to_string(image.height()) + ", key frame is " +
                                                   std::to_string(key.width) + "x" + std::to_string(key.height));
  }
  return extract_cropped(image, key, 0, 0);
}

ExtractionResult extract_cropped(const Image& image, const WatermarkKey& key, int ox, int oy) {
  if (ox % kBlock != 0 || oy % kBlock != 0 || ox < 0 || oy < 0) {
    throw Error(ErrorCode::kInvalidArgument, "crop offset must be non-negative and block aligned");
  }
  if (ox + image.width() > key.width || oy + image.height() > key.height) {
    throw Error(ErrorCode::kDimensionMismatch, "cropped image does not fit the key frame");
  }
  const bool whole = ox == 0 && oy == 0 && image.width() == key.width && image.height() == key.height;
  const int bx = blocks_along(key.width);
  const int lbx = blocks_along(image.width()), lby = blocks_along(image.height());
  const Plane y = luma_plane(image, lbx * kBlock, lby * kBlock);

  std::vector<std::optional<Block>> cache(static_cast<std::size_t>(lbx) * lby);
  std::array<double, kPayloadBits> corr{};
  std::array<int, kPayloadBits> chips{};
  for (const Chip& c : make_pattern(key)) {
    const int gx = c.block % bx, gy = c.block / bx;
    const int lx = gx - ox / kBlock, ly = gy - oy / kBlock;
    if (lx < 0 || ly < 0 || lx >= lbx || ly >= lby) continue;
    // A crop keeps only blocks that lie wholly inside it.
    if (!whole && ((lx + 1) * kBlock > image.width() || (ly + 1) * kBlock > image.height())) continue;
    auto& slot = cache[static_cast<std::size_t>(ly * lbx + lx)];
    if (!slot) {
      Block px{};
      for (int j = 0; j < kBlock; ++j) {
        for (int i = 0; i < kBlock; ++i) px[static_cast<std::size_t>(j * kBlock + i)] = y.at(lx * kBlock + i, ly * kBlock + j);
      }
      slot = dct8(px);
    }
    corr[static_cast<std::size_t>(c.bit)] += c.sign * (*slot)[static_cast<std::size_t>(zigzag_position(c.coef))];
    ++chips[static_cast<std::size_t>(c.bit)];
  }
  return decide(key, corr, chips);
}

double squared_error(const Image& a, const Image& b) {
  require_same_size(a, b);
  double sum = 0;
  const auto sa = a.samples(), sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - sb[i];
    sum += d * d;
  }
  return sum;
}

double psnr(const Image& a, const Image& b) {
  const double se = squared_error(a, b);
  if (se == 0.0) return kIdenticalPsnr;
  const double mse = se / static_cast<double>(a.samples().size());
  return 10.0 * std::log10(1.0 / mse);
}

double protection_loss(const Image& original, const Image& protected_image, double r, double alpha) {
  if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "recoverability penalty must lie in [0,1]");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be non-negative");
  return squared_error(original, protected_image) + alpha * r;
}

std::string watermark_salt() {
  if (const char* s = std::getenv("PROVGEN_WM_SALT"); s != nullptr && *s != '\0') return s;
  return "provgen-development-salt";
}

}  // namespace provgen::protector
