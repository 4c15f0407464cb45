#include "provgen/attack/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "provgen/attack/jpeg.hpp"
#include "provgen/core/error.hpp"
#include "provgen/core/resample.hpp"
#include "provgen/core/rng.hpp"

namespace provgen::attack {

Image gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::kInvalidArgument, "sigma must be non-negative");
  Image out = image;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (float& v : out.samples()) v = static_cast<float>(v + sigma * rng.normal());
  out.clamp();
  return out;
}

int retained_side(int dim, double fraction) {
  const double keep = dim * std::sqrt(1.0 - fraction);
  const int side = static_cast<int>(std::ceil(keep / 8.0 - 1e-9)) * 8;
  return std::min(dim, side);
}

CropResult crop(const Image& image, double fraction, std::optional<std::pair<int, int>> anchor) {
  if (!(fraction >= 0.0 && fraction < 0.5)) throw Error(ErrorCode::kInvalidArgument, "crop fraction must lie in [0, 0.5)");
  const int kw = retained_side(image.width(), fraction);
  const int kh = retained_side(image.height(), fraction);
  int ox = (image.width() - kw) / 2 / 8 * 8;
  int oy = (image.height() - kh) / 2 / 8 * 8;
  if (anchor) {
    std::tie(ox, oy) = *anchor;
    if (ox % 8 != 0 || oy % 8 != 0 || ox < 0 || oy < 0 || ox + kw > image.width() || oy + kh > image.height()) {
      throw Error(ErrorCode::kInvalidArgument, "crop anchor must be block aligned and keep the window in frame");
    }
  }
  CropResult out{Image(kw, kh), ox, oy};
  for (int y = 0; y < kh; ++y) {
    for (int x = 0; x < kw; ++x) {
      for (int c = 0; c < Image::kChannels; ++c) out.image.at(x, y, c) = image.at(ox + x, oy + y, c);
    }
  }
  return out;
}

Image resize(const Image& image, double factor) {
  if (!(factor > 0.0 && factor <= 4.0)) throw Error(ErrorCode::kInvalidArgument, "resize factor must lie in (0, 4]");
  const int w = static_cast<int>(std::lround(image.width() * factor));
  const int h = static_cast<int>(std::lround(image.height() * factor));
  if (w == image.width() && h == image.height()) return image;
  return resize_bilinear(image, w, h);
}

AttackSpec AttackSpec::jpeg(int quality) {
  AttackSpec s;
  s.kind = AttackKind::kJpeg;
  s.quality = quality;
  return s;
}

AttackSpec AttackSpec::noise(double sigma, std::uint64_t seed) {
  AttackSpec s;
  s.kind = AttackKind::kNoise;
  s.sigma = sigma;
  s.seed = seed;
  return s;
}

AttackSpec AttackSpec::crop_area(double fraction) {
  AttackSpec s;
  s.kind = AttackKind::kCrop;
  s.fraction = fraction;
  return s;
}

AttackSpec AttackSpec::resize_by(double factor) {
  AttackSpec s;
  s.kind = AttackKind::kResize;
  s.factor = factor;
  return s;
}

void AttackSpec::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorCode::kInvalidArgument, what); };
  switch (kind) {
    case AttackKind::kNone: break;
    case AttackKind::kJpeg:
      if (quality < 1 || quality > 100) bad("JPEG quality must lie in [1,100]");
      break;
    case AttackKind::kNoise:
      if (!(sigma >= 0.0) || !std::isfinite(sigma)) bad("sigma must be non-negative");
      break;
    case AttackKind::kCrop:
      if (!(fraction >= 0.0 && fraction < 0.5)) bad("crop fraction must lie in [0, 0.5)");
      if (anchor && (anchor->first % 8 != 0 || anchor->second % 8 != 0)) bad("crop anchor must be block aligned");
      break;
    case AttackKind::kResize:
      if (!(factor > 0.0 && factor <= 4.0)) bad("resize factor must lie in (0, 4]");
      break;
  }
}

std::string AttackSpec::name() const {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kJpeg: return "jpeg";
    case AttackKind::kNoise: return "noise";
    case AttackKind::kCrop: return "crop";
    case AttackKind::kResize: return "resize";
  }
  return "?";
}

std::string AttackSpec::param() const {
  char buf[32];
  switch (kind) {
    case AttackKind::kNone: return "";
    case AttackKind::kJpeg: return std::to_string(quality);
    case AttackKind::kNoise: std::snprintf(buf, sizeof buf, "%g", sigma); return buf;
    case AttackKind::kCrop: std::snprintf(buf, sizeof buf, "%g", fraction); return buf;
    case AttackKind::kResize: std::snprintf(buf, sizeof buf, "%g", factor); return buf;
  }
  return "";
}

nlohmann::json to_json(const AttackSpec& s) {
  nlohmann::json j{{"kind", s.name()}};
  switch (s.kind) {
    case AttackKind::kNone: break;
    case AttackKind::kJpeg: j["quality"] = s.quality; break;
    case AttackKind::kNoise:
      j["sigma"] = s.sigma;
      j["seed"] = s.seed;
      j["generator"] = kNoiseGenerator;
      break;
    case AttackKind::kCrop:
      j["fraction"] = s.fraction;
      j["anchor"] = s.anchor ? nlohmann::json{s.anchor->first, s.anchor->second} : nlohmann::json("center");
      break;
    case AttackKind::kResize:
      j["factor"] = s.factor;
      j["kernel"] = kResizeKernel;
      break;
  }
  return j;
}

AttackSpec attack_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    AttackSpec s;
    if (kind == "none") {
    } else if (kind == "jpeg") {
      s = AttackSpec::jpeg(j.at("quality").get<int>());
    } else if (kind == "noise") {
      s = AttackSpec::noise(j.at("sigma").get<double>(), j.value("seed", std::uint64_t{0}));
    } else if (kind == "crop") {
      s = AttackSpec::crop_area(j.at("fraction").get<double>());
      if (j.contains("anchor") && j.at("anchor").is_array()) {
        s.anchor = std::make_pair(j.at("anchor").at(0).get<int>(), j.at("anchor").at(1).get<int>());
      }
    } else if (kind == "resize") {
      s = AttackSpec::resize_by(j.at("factor").get<double>());
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown attack kind '" + kind + "'");
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("attack spec: ") + e.what());
  }
}

}  // namespace provgen::attack
