#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "provgen/core/image.hpp"

namespace provgen {

// Canonical interchange format: binary PPM, header "P6\n<w> <h>\n255\n"
// followed by row-major RGB bytes.
std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_ppm(std::span<const std::uint8_t> bytes);

void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

/// Returns the image after an encode/decode round trip (8-bit quantization).
Image quantize_8bit(const Image& image);

}  // namespace provgen
