#include "provgen/integrator/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "provgen/core/error.hpp"
#include "provgen/core/resample.hpp"

namespace provgen::integrator {

std::string_view to_string(SceneStage stage) {
  switch (stage) {
    case SceneStage::kComposited: return "composited";
    case SceneStage::kHarmonized: return "harmonized";
    case SceneStage::kBlended: return "blended";
  }
  return "?";
}

Scene composite(const std::vector<generator::Component>& components, const Layout& layout, int scene_size) {
  for (const auto& c : components) {
    if (layout.find(c.subtask_id) == nullptr) {
      throw Error(ErrorCode::kMissingPlacement, "component " + std::to_string(c.subtask_id) + " has no placement");
    }
  }
  Scene scene;
  scene.image = Image(scene_size, scene_size);
  scene.layout = layout;
  scene.labels.assign(static_cast<std::size_t>(scene_size) * scene_size, -1);

  for (const Placement& p : layout.placements) {
    const auto it = std::find_if(components.begin(), components.end(),
                                 [&](const auto& c) { return c.subtask_id == p.subtask_id; });
    if (it == components.end()) {
      throw Error(ErrorCode::kMissingPlacement, "placement " + std::to_string(p.subtask_id) + " has no component");
    }
    const Box& b = p.box;
    if (b.x0 < 0 || b.y0 < 0 || b.x1 > scene_size || b.y1 > scene_size || b.width() <= 0 || b.height() <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "placement " + std::to_string(p.subtask_id) + " leaves the frame");
    }
    const Image src = (it->image.width() == b.width() && it->image.height() == b.height())
                          ? it->image
                          : resize_bilinear(it->image, b.width(), b.height());
    Region region{p.subtask_id, b, Plane(b.width(), b.height(), 1.0), p.background};
    if (!p.background && !it->alpha.data.empty()) {
      region.mask = (it->alpha.width == b.width() && it->alpha.height == b.height())
                        ? it->alpha
                        : resize_bilinear(it->alpha, b.width(), b.height());
    }
    for (int y = 0; y < b.height(); ++y) {
      for (int x = 0; x < b.width(); ++x) {
        const double a = region.mask.at(x, y);
        if (a <= 0.0) continue;
        for (int c = 0; c < Image::kChannels; ++c) {
          float& dst = scene.image.at(b.x0 + x, b.y0 + y, c);
          dst = static_cast<float>(src.at(x, y, c) * a + dst * (1.0 - a));
        }
        if (a >= 0.5) scene.labels[static_cast<std::size_t>(b.y0 + y) * scene_size + b.x0 + x] = p.subtask_id;
      }
    }
    scene.regions.push_back(std::move(region));
  }
  scene.image.clamp();
  return scene;
}

namespace {

double quantile(const std::vector<float>& sorted, double r) {
  const double n = static_cast<double>(sorted.size());
  const double pos = std::clamp(r * n - 0.5, 0.0, n - 1.0);
  const auto i0 = static_cast<std::size_t>(std::floor(pos));
  const std::size_t i1 = std::min(i0 + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(i0);
  return sorted[i0] + t * (sorted[i1] - sorted[i0]);
}

// Monotone map: mid-rank in the region sample, then the reference quantile.
double match_value(const std::vector<float>& region, const std::vector<float>& reference, float v) {
  const auto lo = std::lower_bound(region.begin(), region.end(), v);
  const auto hi = std::upper_bound(lo, region.end(), v);
  const double less = static_cast<double>(lo - region.begin());
  const double equal = static_cast<double>(hi - lo);
  return quantile(reference, (less + 0.5 * equal) / static_cast<double>(region.size()));
}

}  // namespace

Scene match_histograms(const Scene& scene, double strength) {
  Scene out = scene;
  if (strength == 0.0) return out;
  const Image& orig = scene.image;
  std::array<std::vector<float>, Image::kChannels> reference;
  for (int c = 0; c < Image::kChannels; ++c) {
    auto& ref = reference[static_cast<std::size_t>(c)];
    ref.reserve(orig.pixel_count());
    for (int y = 0; y < orig.height(); ++y) {
      for (int x = 0; x < orig.width(); ++x) ref.push_back(orig.at(x, y, c));
    }
    std::sort(ref.begin(), ref.end());
  }
  for (const Region& r : scene.regions) {
    if (r.background) continue;
    for (int c = 0; c < Image::kChannels; ++c) {
      std::vector<float> sample;
      for (int y = 0; y < r.box.height(); ++y) {
        for (int x = 0; x < r.box.width(); ++x) {
          if (r.mask.at(x, y) >= 0.5) sample.push_back(orig.at(r.box.x0 + x, r.box.y0 + y, c));
        }
      }
      if (sample.empty()) continue;
      std::sort(sample.begin(), sample.end());
      for (int y = 0; y < r.box.height(); ++y) {
        for (int x = 0; x < r.box.width(); ++x) {
          const double m = r.mask.at(x, y);
          if (m <= 0.0) continue;
          const float v = orig.at(r.box.x0 + x, r.box.y0 + y, c);
          const double mapped = match_value(sample, reference[static_cast<std::size_t>(c)], v);
          float& dst = out.image.at(r.box.x0 + x, r.box.y0 + y, c);
          dst = static_cast<float>(dst + m * strength * (mapped - v));
        }
      }
    }
  }
  out.image.clamp();
  return out;
}

Scene harmonize(const Scene& scene, double* strength_used) {
  if (scene.stage != SceneStage::kComposited) {
    throw Error(ErrorCode::kInvalidArgument, "harmonize expects a composited scene");
  }
  const double before = coherence_loss(scene);
  for (double s : kMatchStrengths) {
    Scene candidate = match_histograms(scene, s);
    if (s == 0.0 || coherence_loss(candidate) <= before) {
      candidate.stage = SceneStage::kHarmonized;
      if (strength_used != nullptr) *strength_used = s;
      return candidate;
    }
  }
  return scene;  // unreachable: strength 0 always accepts
}

std::vector<bool> seam_band(const Scene& scene) {
  const int w = scene.image.width(), h = scene.image.height();
  std::vector<bool> boundary(static_cast<std::size_t>(w) * h, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = scene.label(x, y);
      if ((x + 1 < w && scene.label(x + 1, y) != l) || (x > 0 && scene.label(x - 1, y) != l) ||
          (y + 1 < h && scene.label(x, y + 1) != l) || (y > 0 && scene.label(x, y - 1) != l)) {
        boundary[static_cast<std::size_t>(y) * w + x] = true;
      }
    }
  }
  std::vector<bool> band(boundary.size(), false);
  const int r = kSeamHalfWidth - 1;
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      bool hit = false;
      for (int dy = -r; dy <= r && !hit; ++dy) {
        for (int dx = -r; dx <= r && !hit; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < w && yy < h && boundary[static_cast<std::size_t>(yy) * w + xx]) hit = true;
        }
      }
      band[static_cast<std::size_t>(y) * w + x] = hit;
    }
  }
  return band;
}

SeamSystem seam_system(const Scene& scene, const std::vector<bool>& band, int channel) {
  const Image& img = scene.image;
  const int w = img.width(), h = img.height();
  auto value = [&](int x, int y) { return static_cast<double>(img.at(x, y, channel)); };
  auto in_bounds = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h; };

  // Forward difference f(p + d) - f(p); seam-crossing ones take the mean of
  // the non-crossing differences just before and after along the same axis.
  auto guided = [&](int x, int y, int dx, int dy) {
    const int qx = x + dx, qy = y + dy;
    if (scene.label(x, y) == scene.label(qx, qy)) return value(qx, qy) - value(x, y);
    double sum = 0;
    int n = 0;
    for (int k : {-1, 1}) {
      const int ax = k < 0 ? x - dx : qx, ay = k < 0 ? y - dy : qy;
      const int bx = ax + dx, by = ay + dy;
      if (!in_bounds(ax, ay) || !in_bounds(bx, by)) continue;
      if (scene.label(ax, ay) != scene.label(bx, by)) continue;
      sum += value(bx, by) - value(ax, ay);
      ++n;
    }
    return n > 0 ? sum / n : 0.0;
  };

  SeamSystem sys;
  std::vector<int> index(band.size(), -1);
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (band[i]) {
      index[i] = static_cast<int>(sys.pixels.size());
      sys.pixels.push_back(static_cast<int>(i));
    }
  }
  constexpr std::array<std::array<int, 2>, 4> kDirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (int p : sys.pixels) {
    const int x = p % w, y = p / w;
    std::array<int, 4> nb{};
    double rhs = 0;
    for (std::size_t k = 0; k < kDirs.size(); ++k) {
      const int dx = kDirs[k][0], dy = kDirs[k][1];
      const int qx = x + dx, qy = y + dy;
      // f_p - f_q along the guidance field.
      rhs += (dx + dy > 0) ? -guided(x, y, dx, dy) : guided(qx, qy, -dx, -dy);
      const int qi = index[static_cast<std::size_t>(qy) * w + qx];
      nb[k] = qi;
      if (qi < 0) rhs += value(qx, qy);
    }
    sys.neighbors.push_back(nb);
    sys.rhs.push_back(rhs);
  }
  return sys;
}

Scene blend_seams(const Scene& scene, BlendStats* stats) {
  if (scene.stage != SceneStage::kHarmonized) {
    throw Error(ErrorCode::kInvalidArgument, "blend_seams expects a harmonized scene");
  }
  Scene out = scene;
  out.stage = SceneStage::kBlended;
  const std::vector<bool> band = seam_band(scene);
  BlendStats local;
  for (int c = 0; c < Image::kChannels; ++c) {
    const SeamSystem sys = seam_system(scene, band, c);
    local.band_pixels = sys.pixels.size();
    if (sys.pixels.empty()) continue;
    std::vector<double> f(sys.pixels.size());
    const int w = scene.image.width();
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = scene.image.at(sys.pixels[i] % w, sys.pixels[i] / w, c);
    }
    auto neighbor_sum = [&](std::size_t i) {
      double s = 0;
      for (int q : sys.neighbors[i]) {
        if (q >= 0) s += f[static_cast<std::size_t>(q)];
      }
      return s;
    };
    int iter = 0;
    double residual = 0;
    for (;;) {
      residual = 0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = std::fabs(4.0 * f[i] - neighbor_sum(i) - sys.rhs[i]);
        // std::max would drop a NaN.
        residual = std::isfinite(r) ? std::max(residual, r) : r;
        if (!std::isfinite(residual)) break;
      }
      if (!std::isfinite(residual)) throw Error(ErrorCode::kSolverDiverged, "seam solve produced a non-finite residual");
      if (residual < kSolverTolerance || iter >= kSolverMaxIterations) break;
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = (sys.rhs[i] + neighbor_sum(i)) / 4.0;
      ++iter;
    }
    local.iterations = std::max(local.iterations, iter);
    local.residual = std::max(local.residual, residual);
    for (std::size_t i = 0; i < f.size(); ++i) {
      out.image.at(sys.pixels[i] % w, sys.pixels[i] / w, c) = static_cast<float>(std::clamp(f[i], 0.0, 1.0));
    }
  }
  if (stats != nullptr) *stats = local;
  return out;
}

FeatureVector extract_features(const Image& image, const Box& r, const Plane& mask) {
  if (r.x0 < 0 || r.y0 < 0 || r.x1 > image.width() || r.y1 > image.height()) {
    throw Error(ErrorCode::kInvalidArgument, "feature region leaves the image");
  }
  if (mask.width != r.width() || mask.height != r.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature mask does not match its region");
  }
  FeatureVector v{};
  auto luma = [&](int x, int y) {
    x = std::clamp(x, r.x0, r.x1 - 1);
    y = std::clamp(y, r.y0, r.y1 - 1);
    return 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
  };
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) {
      const double wgt = mask.at(x - r.x0, y - r.y0);
      if (wgt <= 0.0) continue;
      for (int c = 0; c < Image::kChannels; ++c) {
        const int bin = std::min(15, static_cast<int>(image.at(x, y, c) * 16.0f));
        v[static_cast<std::size_t>(16 * c + bin)] += wgt;
      }
      const double gx = luma(x + 1, y) - luma(x - 1, y);
      const double gy = luma(x, y + 1) - luma(x, y - 1);
      const double mag = std::hypot(gx, gy);
      if (mag <= 1e-12) continue;
      const double turn = (std::atan2(gy, gx) + std::numbers::pi) / (2.0 * std::numbers::pi);
      const int bin = std::min(7, static_cast<int>(turn * 8.0));
      v[static_cast<std::size_t>(48 + bin)] += wgt * mag;
    }
  }
  auto normalize = [&](std::size_t begin, std::size_t end) {
    double n = 0;
    for (std::size_t i = begin; i < end; ++i) n += v[i] * v[i];
    if (n <= 0.0) return;
    n = std::sqrt(n);
    for (std::size_t i = begin; i < end; ++i) v[i] /= n;
  };
  normalize(0, 48);
  normalize(48, 56);
  normalize(0, 56);
  return v;
}

std::map<int, FeatureVector> region_features(const Scene& scene) {
  std::map<int, FeatureVector> out;
  for (const Region& r : scene.regions) {
    if (!r.background) out[r.subtask_id] = extract_features(scene.image, r.box, r.mask);
  }
  return out;
}

double coherence_loss(const std::map<int, FeatureVector>& features, const Adjacency& adjacency) {
  double sum = 0;
  for (const auto& [a, b] : adjacency) {
    const auto ia = features.find(a), ib = features.find(b);
    if (ia == features.end() || ib == features.end()) {
      throw Error(ErrorCode::kInvalidArgument, "adjacent pair lacks features");
    }
    for (int k = 0; k < kFeatureDim; ++k) {
      const double d = ia->second[static_cast<std::size_t>(k)] - ib->second[static_cast<std::size_t>(k)];
      sum += d * d;
    }
  }
  return sum;
}

double coherence_loss(const Scene& scene) {
  if (scene.layout.adjacency.empty()) return 0.0;
  return coherence_loss(region_features(scene), scene.layout.adjacency);
}

}  // namespace provgen::integrator
