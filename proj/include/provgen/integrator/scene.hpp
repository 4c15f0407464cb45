#pragma once

#include <array>
#include <map>
#include <string_view>
#include <vector>

#include "provgen/core/image.hpp"
#include "provgen/generator/component.hpp"
#include "provgen/integrator/layout.hpp"

namespace provgen::integrator {

enum class SceneStage { kComposited, kHarmonized, kBlended };
std::string_view to_string(SceneStage stage);

/// Opacity of one placed component, in box coordinates.
struct Region {
  int subtask_id = 0;
  Box box;
  Plane mask;
  bool background = false;
};

struct Scene {
  Image image;
  Layout layout;
  SceneStage stage = SceneStage::kComposited;
  std::vector<Region> regions;  // paint order
  std::vector<int> labels;      // per pixel: topmost region with opacity >= 0.5

  int label(int x, int y) const { return labels[static_cast<std::size_t>(y) * image.width() + x]; }
};

/// Back-to-front source-over paint. Components are resampled to their boxes.
/// Throws kMissingPlacement.
Scene composite(const std::vector<generator::Component>& components, const Layout& layout, int scene_size);

inline constexpr std::array<double, 4> kMatchStrengths{1.0, 0.5, 0.25, 0.0};

/// Quantile-maps each foreground region toward the whole-scene histogram at
/// `strength` (0 is the identity).
Scene match_histograms(const Scene& scene, double strength);

/// Tries the strengths in order and keeps the first one that does not raise
/// the coherence loss.
Scene harmonize(const Scene& scene, double* strength_used = nullptr);

inline constexpr int kSeamHalfWidth = 2;
inline constexpr double kSolverTolerance = 1e-6;
inline constexpr int kSolverMaxIterations = 10000;

/// Sparse band system for one channel: 4 f_p - sum_{q in band} f_q = rhs_p.
struct SeamSystem {
  std::vector<int> pixels;                   // y * width + x, ascending
  std::vector<std::array<int, 4>> neighbors;  // index into pixels, or -1 (Dirichlet)
  std::vector<double> rhs;
};

std::vector<bool> seam_band(const Scene& scene);
SeamSystem seam_system(const Scene& scene, const std::vector<bool>& band, int channel);

struct BlendStats {
  int iterations = 0;
  double residual = 0;
  std::size_t band_pixels = 0;
};

/// Gauss-Seidel solve of the guided Poisson equation over the seam band.
/// Throws kSolverDiverged on a non-finite residual.
Scene blend_seams(const Scene& scene, BlendStats* stats = nullptr);

inline constexpr int kFeatureDim = 56;
using FeatureVector = std::array<double, kFeatureDim>;

/// Three opacity-weighted 16-bin channel histograms followed by an 8-bin
/// gradient-orientation histogram. Each part is normalized, then the whole.
FeatureVector extract_features(const Image& image, const Box& region, const Plane& mask);

std::map<int, FeatureVector> region_features(const Scene& scene);

double coherence_loss(const std::map<int, FeatureVector>& features, const Adjacency& adjacency);
double coherence_loss(const Scene& scene);

}  // namespace provgen::integrator
