#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "provgen/core/image.hpp"
#include "provgen/planner/plan.hpp"

namespace provgen::generator {

struct GlyphStyle {
  double hue = 0;
  double saturation = 0.75;
  double scale = 0.8;
  double rotation_deg = 0;
};

struct Raster {
  Image image;
  Plane alpha;
};

bool has_glyph(std::string_view entity);
std::span<const std::string_view> glyph_names();

/// Default hue/saturation of an entity when no color tag is given.
GlyphStyle default_style(std::string_view entity);

/// Style derived from a foreground subtask's attributes (no seed jitter).
GlyphStyle style_for(const planner::Subtask& subtask);

double size_scale(planner::SizeClass size);

/// Renders `entity` into a square canvas. `seed` perturbs primitive
/// placement, rotation and hue; seed 0 with jitter disabled is the reference.
Raster render_glyph(std::string_view entity, const GlyphStyle& style, int resolution,
                    std::uint64_t seed, bool jitter = true);

/// Vertical gradient for a background phrase (sunset, night, noon) or the
/// neutral backdrop when `phrase` is empty. An unknown phrase with a hue
/// renders a gradient of that hue.
Image render_background(std::string_view phrase, int resolution, std::uint64_t seed,
                        std::optional<double> hue = std::nullopt);

/// Mean alpha of the unjittered glyph at scale 1, upright.
double reference_coverage(std::string_view entity);

}  // namespace provgen::generator
