#include "provgen/core/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace provgen {

namespace {

struct Tap {
  int i0;
  int i1;
  double t;
};

std::vector<Tap> taps(int src, int dst) {
  std::vector<Tap> out(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(src - 1));
    const int i0 = static_cast<int>(std::floor(s));
    out[static_cast<std::size_t>(i)] = {i0, std::min(i0 + 1, src - 1), s - i0};
  }
  return out;
}

// a + t * (b - a) keeps constant inputs bit-exact.
template <typename T>
T lerp(T a, T b, double t) {
  return static_cast<T>(a + t * (b - a));
}

}  // namespace

Image resize_bilinear(const Image& image, int width, int height) {
  Image out(width, height);
  const auto xs = taps(image.width(), width);
  const auto ys = taps(image.height(), height);
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = lerp<double>(image.at(tx.i0, ty.i0, c), image.at(tx.i1, ty.i0, c), tx.t);
        const double bottom = lerp<double>(image.at(tx.i0, ty.i1, c), image.at(tx.i1, ty.i1, c), tx.t);
        out.at(x, y, c) = static_cast<float>(lerp(top, bottom, ty.t));
      }
    }
  }
  out.clamp();
  return out;
}

Plane resize_bilinear(const Plane& plane, int width, int height) {
  Plane out(width, height);
  const auto xs = taps(plane.width, width);
  const auto ys = taps(plane.height, height);
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      const double top = lerp(plane.at(tx.i0, ty.i0), plane.at(tx.i1, ty.i0), tx.t);
      const double bottom = lerp(plane.at(tx.i0, ty.i1), plane.at(tx.i1, ty.i1), tx.t);
      out.at(x, y) = lerp(top, bottom, ty.t);
    }
  }
  return out;
}

}  // namespace provgen
