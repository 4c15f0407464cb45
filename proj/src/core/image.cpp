#include "provgen/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "provgen/core/error.hpp"

namespace provgen {

namespace {

void check_dimensions(int width, int height) {
  if (width < Image::kMinSide || height < Image::kMinSide) {
    throw Error(ErrorCode::kInvalidArgument,
                "image dimensions " + std::to_string(width) + "x" +
                    std::to_string(height) + " below minimum side " +
                    std::to_string(Image::kMinSide));
  }
}

}  // namespace

Image::Image(int width, int height, float fill) : width_(width), height_(height) {
  check_dimensions(width, height);
  data_.assign(pixel_count() * kChannels, fill);
}

Image::Image(int width, int height, std::vector<float> samples)
    : width_(width), height_(height), data_(std::move(samples)) {
  check_dimensions(width, height);
  if (data_.size() != pixel_count() * kChannels) {
    throw Error(ErrorCode::kInvalidArgument, "sample count does not match dimensions");
  }
}

void Image::clamp() noexcept {
  for (float& v : data_) {
    v = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
  }
}

bool Image::valid() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

unsigned char quantize_sample(float x) noexcept {
  if (!std::isfinite(x)) return 0;
  const float scaled = std::round(std::clamp(x, 0.0f, 1.0f) * 255.0f);
  return static_cast<unsigned char>(scaled);
}

}  // namespace provgen
