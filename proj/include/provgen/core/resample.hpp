#pragma once

#include "provgen/core/image.hpp"

namespace provgen {

// Bilinear resampling with pixel-center alignment and edge clamping.
Image resize_bilinear(const Image& image, int width, int height);
Plane resize_bilinear(const Plane& plane, int width, int height);

}  // namespace provgen
