#pragma once

namespace provgen {

struct Rgb {
  double r = 0, g = 0, b = 0;
};

struct Hsv {
  double h = 0;  // degrees [0,360)
  double s = 0;
  double v = 0;
};

struct YCbCr {
  double y = 0, cb = 0, cr = 0;  // full-range BT.601, chroma centered on 0.5
};

Hsv rgb_to_hsv(const Rgb& c);
Rgb hsv_to_rgb(const Hsv& c);

YCbCr rgb_to_ycbcr(const Rgb& c);
Rgb ycbcr_to_rgb(const YCbCr& c);

}  // namespace provgen
