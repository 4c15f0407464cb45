#include "provgen/core/png_codec.hpp"

#include <png.h>

#include <cstring>
#include <string>

#include "provgen/core/error.hpp"

namespace provgen {

bool looks_like_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

std::vector<std::uint8_t> encode_png(const Image& image, const Plane* alpha) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width());
  desc.height = static_cast<png_uint_32>(image.height());
  desc.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  const int channels = alpha ? 4 : 3;

  std::vector<std::uint8_t> raster(image.pixel_count() * channels);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * image.width() + x) * channels;
      for (int c = 0; c < 3; ++c) raster[base + c] = quantize_sample(image.at(x, y, c));
      if (alpha) raster[base + 3] = quantize_sample(static_cast<float>(alpha->at(x, y)));
    }
  }
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, raster.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode failed: ") + desc.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, raster.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode failed: ") + desc.message);
  }
  out.resize(size);
  return out;
}

DecodedRaster decode_png(std::span<const std::uint8_t> bytes) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kMalformedImage, std::string("PNG decode failed: ") + desc.message);
  }
  const bool has_alpha = (desc.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  desc.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> raster(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, raster.data(), 0, nullptr)) {
    throw Error(ErrorCode::kMalformedImage, std::string("PNG decode failed: ") + desc.message);
  }
  const int w = static_cast<int>(desc.width);
  const int h = static_cast<int>(desc.height);
  DecodedRaster out{Image(w, h), std::nullopt};
  if (has_alpha) out.alpha = Plane(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * w + x) * 4;
      for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = raster[base + c] / 255.0f;
      if (has_alpha) out.alpha->at(x, y) = raster[base + 3] / 255.0;
    }
  }
  return out;
}

}  // namespace provgen
