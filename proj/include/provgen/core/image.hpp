#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace provgen {

/// Owned RGB raster with float samples in [0,1], row-major, interleaved.
///
/// A default-constructed Image is empty (0x0) and only useful as a
/// placeholder; every other constructor enforces the minimum side length.
class Image {
 public:
  static constexpr int kChannels = 3;
  static constexpr int kMinSide = 16;

  Image() = default;
  Image(int width, int height, float fill = 0.0f);
  Image(int width, int height, std::vector<float> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  float at(int x, int y, int c) const noexcept { return data_[index(x, y, c)]; }
  float& at(int x, int y, int c) noexcept { return data_[index(x, y, c)]; }

  std::span<float> samples() noexcept { return data_; }
  std::span<const float> samples() const noexcept { return data_; }

  /// Clamps every sample to [0,1]; non-finite samples become 0.
  void clamp() noexcept;

  /// True iff every sample is finite and inside [0,1].
  bool valid() const noexcept;

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               kChannels +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Single-channel float plane, used for alpha masks and luma.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double at(int x, int y) const noexcept {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) noexcept {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const Plane&) const = default;
};

/// 8-bit quantization used at every I/O boundary: round(x * 255), clamped.
unsigned char quantize_sample(float x) noexcept;

}  // namespace provgen
