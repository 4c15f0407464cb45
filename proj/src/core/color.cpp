#include "provgen/core/color.hpp"

#include <algorithm>
#include <cmath>

namespace provgen {

Hsv rgb_to_hsv(const Rgb& c) {
  const double mx = std::max({c.r, c.g, c.b});
  const double mn = std::min({c.r, c.g, c.b});
  const double d = mx - mn;
  Hsv out{0.0, mx > 0.0 ? d / mx : 0.0, mx};
  if (d <= 0.0) return out;
  double h;
  if (mx == c.r) {
    h = std::fmod((c.g - c.b) / d, 6.0);
  } else if (mx == c.g) {
    h = (c.b - c.r) / d + 2.0;
  } else {
    h = (c.r - c.g) / d + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  out.h = h;
  return out;
}

Rgb hsv_to_rgb(const Hsv& c) {
  const double h = std::fmod(std::fmod(c.h, 360.0) + 360.0, 360.0) / 60.0;
  const double chroma = c.v * c.s;
  const double x = chroma * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  const double m = c.v - chroma;
  Rgb out;
  switch (static_cast<int>(h)) {
    case 0: out = {chroma, x, 0}; break;
    case 1: out = {x, chroma, 0}; break;
    case 2: out = {0, chroma, x}; break;
    case 3: out = {0, x, chroma}; break;
    case 4: out = {x, 0, chroma}; break;
    default: out = {chroma, 0, x}; break;
  }
  out.r += m;
  out.g += m;
  out.b += m;
  return out;
}

YCbCr rgb_to_ycbcr(const Rgb& c) {
  return {0.299 * c.r + 0.587 * c.g + 0.114 * c.b,
          -0.168735892 * c.r - 0.331264108 * c.g + 0.5 * c.b + 0.5,
          0.5 * c.r - 0.418687589 * c.g - 0.081312411 * c.b + 0.5};
}

Rgb ycbcr_to_rgb(const YCbCr& c) {
  const double cb = c.cb - 0.5;
  const double cr = c.cr - 0.5;
  return {c.y + 1.402 * cr, c.y - 0.344136286 * cb - 0.714136286 * cr, c.y + 1.772 * cb};
}

}  // namespace provgen
