#include "provgen/generator/glyph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "provgen/core/color.hpp"
#include "provgen/core/error.hpp"
#include "provgen/core/rng.hpp"
#include "provgen/planner/lexicon.hpp"

namespace provgen::generator {

namespace {

struct Vec2 {
  double x = 0, y = 0;
};

enum class Shape { kEllipse, kPolygon, kCapsule };

struct Primitive {
  Shape shape;
  std::vector<Vec2> pts;  // ellipse: center; capsule: polyline; polygon: ring
  double rx = 0, ry = 0, angle = 0, radius = 0;
  double shade = 0.8;
  bool cut = false;
};

Primitive ellipse(double cx, double cy, double rx, double ry, double shade, double angle = 0) {
  return {Shape::kEllipse, {{cx, cy}}, rx, ry, angle, 0, shade, false};
}
Primitive circle(double cx, double cy, double r, double shade) { return ellipse(cx, cy, r, r, shade); }
Primitive poly(std::vector<Vec2> pts, double shade) {
  return {Shape::kPolygon, std::move(pts), 0, 0, 0, 0, shade, false};
}
Primitive rect(double x0, double y0, double x1, double y1, double shade) {
  return poly({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, shade);
}
Primitive capsule(std::vector<Vec2> pts, double r, double shade) {
  return {Shape::kCapsule, std::move(pts), 0, 0, 0, r, shade, false};
}
Primitive cut(Primitive p) {
  p.cut = true;
  return p;
}

std::vector<Primitive> star_points(int points, double r_out, double r_in, double shade) {
  std::vector<Vec2> ring;
  for (int k = 0; k < 2 * points; ++k) {
    const double a = -std::numbers::pi / 2 + k * std::numbers::pi / points;
    const double r = k % 2 == 0 ? r_out : r_in;
    ring.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return {poly(std::move(ring), shade)};
}

std::vector<Primitive> sun_shapes() {
  std::vector<Primitive> out;
  for (int k = 0; k < 8; ++k) {
    const double a = k * std::numbers::pi / 4;
    const double w = 0.18;
    out.push_back(poly({{0.24 * std::cos(a - w), 0.24 * std::sin(a - w)},
                        {0.44 * std::cos(a), 0.44 * std::sin(a)},
                        {0.24 * std::cos(a + w), 0.24 * std::sin(a + w)}},
                       0.8));
  }
  out.push_back(circle(0, 0, 0.26, 1.0));
  return out;
}

struct GlyphDef {
  std::string_view name;
  double hue;
  double saturation;
  std::vector<Primitive> prims;
};

const std::vector<GlyphDef>& table() {
  static const std::vector<GlyphDef> defs = [] {
    std::vector<GlyphDef> d;
    d.push_back({"dragon", 120, 0.75,
                 {capsule({{-0.18, 0.06}, {-0.3, 0.14}, {-0.42, 0.06}}, 0.035, 0.7),
                  poly({{-0.08, 0.0}, {0.08, 0.0}, {-0.12, -0.36}}, 0.6),
                  capsule({{-0.08, 0.14}, {-0.1, 0.24}}, 0.025, 0.7),
                  capsule({{0.08, 0.14}, {0.1, 0.24}}, 0.025, 0.7),
                  ellipse(0, 0.06, 0.22, 0.11, 0.85),
                  poly({{-0.02, 0.02}, {0.14, 0.02}, {0.12, -0.4}}, 0.72),
                  capsule({{0.16, 0.02}, {0.26, -0.1}}, 0.04, 0.85),
                  ellipse(0.3, -0.13, 0.08, 0.055, 0.95, -0.3)}});
    d.push_back({"castle", 210, 0.35,
                 {rect(-0.3, -0.05, 0.3, 0.38, 0.8),
                  rect(-0.4, -0.3, -0.22, 0.38, 0.7),
                  rect(0.22, -0.3, 0.4, 0.38, 0.7),
                  poly({{-0.42, -0.3}, {-0.2, -0.3}, {-0.31, -0.44}}, 0.95),
                  poly({{0.2, -0.3}, {0.42, -0.3}, {0.31, -0.44}}, 0.95),
                  rect(-0.2, -0.12, -0.12, -0.05, 0.8),
                  rect(-0.04, -0.12, 0.04, -0.05, 0.8),
                  rect(0.12, -0.12, 0.2, -0.05, 0.8),
                  rect(-0.07, 0.18, 0.07, 0.38, 0.5)}});
    d.push_back({"tree", 120, 0.75,
                 {rect(-0.05, 0.05, 0.05, 0.42, 0.55),
                  ellipse(0, -0.12, 0.28, 0.26, 0.85),
                  ellipse(-0.16, -0.02, 0.16, 0.14, 0.75),
                  ellipse(0.16, -0.02, 0.16, 0.14, 0.75),
                  ellipse(0, -0.3, 0.16, 0.12, 0.95)}});
    d.push_back({"house", 30, 0.75,
                 {rect(0.14, -0.32, 0.22, -0.16, 0.6),
                  poly({{-0.36, -0.05}, {0.36, -0.05}, {0, -0.38}}, 0.65),
                  rect(-0.28, -0.05, 0.28, 0.38, 0.8),
                  rect(-0.06, 0.16, 0.06, 0.38, 0.5),
                  rect(0.1, 0.05, 0.2, 0.15, 0.95)}});
    d.push_back({"sun", 60, 0.8, sun_shapes()});
    d.push_back({"moon", 60, 0.55,
                 {circle(0, 0, 0.34, 0.95), cut(circle(0.16, -0.08, 0.3, 0)),
                  circle(-0.2, 0.1, 0.05, 0.8)}});
    d.push_back({"bird", 240, 0.75,
                 {poly({{-0.12, 0.04}, {-0.26, -0.02}, {-0.26, 0.1}}, 0.7),
                  poly({{-0.06, 0.02}, {0.06, 0.02}, {-0.2, -0.28}}, 0.7),
                  ellipse(0, 0.04, 0.14, 0.06, 0.85),
                  circle(0.15, 0, 0.05, 0.95),
                  poly({{0.19, -0.01}, {0.19, 0.02}, {0.25, 0.005}}, 0.6),
                  poly({{-0.02, 0.02}, {0.1, 0.02}, {0.08, -0.3}}, 0.8)}});
    d.push_back({"mountain", 270, 0.55,
                 {poly({{-0.45, 0.38}, {0.45, 0.38}, {0.05, -0.36}}, 0.7),
                  poly({{-0.45, 0.38}, {0.05, 0.38}, {-0.22, -0.1}}, 0.6),
                  poly({{-0.06, -0.16}, {0.16, -0.16}, {0.05, -0.36}}, 0.98)}});
    d.push_back({"boat", 0, 0.75,
                 {poly({{-0.38, 0.12}, {0.38, 0.12}, {0.26, 0.3}, {-0.26, 0.3}}, 0.7),
                  rect(-0.015, -0.38, 0.015, 0.12, 0.5),
                  poly({{0.03, -0.36}, {0.03, 0.06}, {0.3, 0.06}}, 0.95),
                  poly({{-0.03, -0.3}, {-0.03, 0.06}, {-0.22, 0.06}}, 0.85)}});
    d.push_back({"cloud", 210, 0.25,
                 {ellipse(0, 0.1, 0.32, 0.1, 0.85),
                  ellipse(-0.2, 0.06, 0.18, 0.13, 0.9),
                  ellipse(0.22, 0.06, 0.17, 0.13, 0.88),
                  ellipse(0.02, -0.04, 0.22, 0.18, 0.98)}});
    d.push_back({"circle", 0, 0.75, {circle(0, 0, 0.4, 0.85), circle(-0.1, -0.1, 0.12, 0.98)}});
    d.push_back({"square", 240, 0.75, {rect(-0.3, -0.3, 0.3, 0.3, 0.8), rect(-0.22, -0.22, 0.22, 0.22, 0.95)}});
    d.push_back({"star", 60, 0.8, star_points(5, 0.44, 0.18, 0.95)});
    return d;
  }();
  return defs;
}

const GlyphDef* find_def(std::string_view name) {
  for (const auto& d : table()) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

bool inside_polygon(const std::vector<Vec2>& ring, Vec2 p) {
  bool in = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2 a = ring[i], b = ring[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

bool covers(const Primitive& prim, Vec2 p) {
  switch (prim.shape) {
    case Shape::kEllipse: {
      const double c = std::cos(prim.angle), s = std::sin(prim.angle);
      const double dx = p.x - prim.pts[0].x, dy = p.y - prim.pts[0].y;
      const double u = (c * dx + s * dy) / prim.rx;
      const double v = (-s * dx + c * dy) / prim.ry;
      return u * u + v * v <= 1.0;
    }
    case Shape::kPolygon:
      return inside_polygon(prim.pts, p);
    case Shape::kCapsule:
      for (std::size_t i = 0; i + 1 < prim.pts.size(); ++i) {
        if (segment_distance(prim.pts[i], prim.pts[i + 1], p) <= prim.radius) return true;
      }
      return false;
  }
  return false;
}

double pose_rotation(std::string_view pose) {
  if (pose == "flying") return -15;
  if (pose == "sitting") return 10;
  if (pose == "swimming") return 5;
  if (pose == "sleeping") return 20;
  return 0;
}

constexpr int kSuper = 4;

}  // namespace

bool has_glyph(std::string_view entity) { return find_def(entity) != nullptr; }

std::span<const std::string_view> glyph_names() {
  static const std::vector<std::string_view> names = [] {
    std::vector<std::string_view> out;
    for (const auto& d : table()) out.push_back(d.name);
    return out;
  }();
  return names;
}

double size_scale(planner::SizeClass size) {
  switch (size) {
    case planner::SizeClass::kSmall: return 0.6;
    case planner::SizeClass::kMedium: return 0.8;
    case planner::SizeClass::kLarge: return 1.0;
  }
  return 0.8;
}

GlyphStyle default_style(std::string_view entity) {
  const GlyphDef* def = find_def(entity);
  if (def == nullptr) throw Error(ErrorCode::kUnknownEntity, "no glyph for entity '" + std::string(entity) + "'");
  return {def->hue, def->saturation, 0.8, 0.0};
}

GlyphStyle style_for(const planner::Subtask& subtask) {
  GlyphStyle style = default_style(subtask.entity);
  const auto& a = subtask.attributes;
  if (a.color) {
    const auto idx = planner::color_index(*a.color);
    if (!idx) throw Error(ErrorCode::kInvalidArgument, "unknown color tag '" + *a.color + "'");
    style.hue = planner::color_terms()[static_cast<std::size_t>(*idx)].hue_degrees;
    style.saturation = 0.75;
  }
  style.scale = size_scale(a.size.value_or(planner::SizeClass::kMedium));
  if (a.pose) style.rotation_deg = pose_rotation(*a.pose);
  return style;
}

Raster render_glyph(std::string_view entity, const GlyphStyle& style, int resolution,
                    std::uint64_t seed, bool jitter) {
  const GlyphDef* def = find_def(entity);
  if (def == nullptr) throw Error(ErrorCode::kUnknownEntity, "no glyph for entity '" + std::string(entity) + "'");
  if (resolution < Image::kMinSide) throw Error(ErrorCode::kInvalidArgument, "glyph resolution too small");

  std::vector<Primitive> prims = def->prims;
  double hue = style.hue, scale = style.scale, rot = style.rotation_deg;
  if (jitter) {
    Rng rng(mix_seed(seed, 0x67));
    hue += rng.uniform(-4.0, 4.0);
    scale *= 1.0 + rng.uniform(-0.03, 0.03);
    rot += rng.uniform(-4.0, 4.0);
    for (auto& p : prims) {
      const double dx = rng.uniform(-0.015, 0.015), dy = rng.uniform(-0.015, 0.015);
      for (auto& v : p.pts) {
        v.x += dx;
        v.y += dy;
      }
      if (p.shape == Shape::kEllipse) {
        p.rx *= 1.0 + rng.uniform(-0.04, 0.04);
        p.ry *= 1.0 + rng.uniform(-0.04, 0.04);
      }
      p.shade = std::clamp(p.shade + rng.uniform(-0.04, 0.04), 0.3, 1.0);
    }
  }

  const double theta = rot * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  Raster out{Image(resolution, resolution), Plane(resolution, resolution)};
  for (int y = 0; y < resolution; ++y) {
    for (int x = 0; x < resolution; ++x) {
      int hits = 0;
      double shade_sum = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double u = (x + (sx + 0.5) / kSuper) / resolution - 0.5;
          const double v = (y + (sy + 0.5) / kSuper) / resolution - 0.5;
          const Vec2 q{(c * u + s * v) / scale, (-s * u + c * v) / scale};
          bool covered = false;
          double shade = 0;
          for (const auto& p : prims) {
            if (!covers(p, q)) continue;
            covered = !p.cut;
            shade = p.shade;
          }
          if (covered) {
            ++hits;
            shade_sum += shade;
          }
        }
      }
      if (hits == 0) continue;
      const Rgb rgb = hsv_to_rgb({hue, style.saturation, 0.92 * shade_sum / hits});
      out.image.at(x, y, 0) = static_cast<float>(rgb.r);
      out.image.at(x, y, 1) = static_cast<float>(rgb.g);
      out.image.at(x, y, 2) = static_cast<float>(rgb.b);
      out.alpha.at(x, y) = static_cast<double>(hits) / (kSuper * kSuper);
    }
  }
  return out;
}

Image render_background(std::string_view phrase, int resolution, std::uint64_t seed,
                        std::optional<double> hue) {
  Hsv top{0, 0, 0.55}, bottom{0, 0, 0.78};
  if (phrase == "sunset") {
    top = {38, 0.85, 0.97};
    bottom = {18, 0.8, 0.85};
  } else if (phrase == "night") {
    top = {232, 0.75, 0.22};
    bottom = {248, 0.6, 0.42};
  } else if (phrase == "noon") {
    top = {212, 0.6, 0.95};
    bottom = {202, 0.35, 1.0};
  } else if (hue) {
    top = {*hue, 0.6, 0.9};
    bottom = {*hue, 0.45, 0.75};
  }
  Rng rng(mix_seed(seed, 0x62));
  const double hue_shift = top.s > 0 ? rng.uniform(-3.0, 3.0) : 0.0;
  const double phase_x = rng.uniform(0, 2 * std::numbers::pi);
  const double phase_y = rng.uniform(0, 2 * std::numbers::pi);
  Image out(resolution, resolution);
  for (int y = 0; y < resolution; ++y) {
    const double t = resolution > 1 ? static_cast<double>(y) / (resolution - 1) : 0.0;
    for (int x = 0; x < resolution; ++x) {
      const double u = static_cast<double>(x) / resolution;
      const double ripple = 0.015 * std::sin(2 * std::numbers::pi * u + phase_x) *
                            std::cos(std::numbers::pi * t + phase_y);
      const Hsv hsv{top.h + t * (bottom.h - top.h) + hue_shift, top.s + t * (bottom.s - top.s),
                    std::clamp(top.v + t * (bottom.v - top.v) + ripple, 0.0, 1.0)};
      const Rgb rgb = hsv_to_rgb(hsv);
      out.at(x, y, 0) = static_cast<float>(rgb.r);
      out.at(x, y, 1) = static_cast<float>(rgb.g);
      out.at(x, y, 2) = static_cast<float>(rgb.b);
    }
  }
  out.clamp();
  return out;
}

double reference_coverage(std::string_view entity) {
  static std::mutex mu;
  static std::map<std::string, double, std::less<>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(entity); it != cache.end()) return it->second;
  GlyphStyle style = default_style(entity);
  style.scale = 1.0;
  const Raster r = render_glyph(entity, style, 128, 0, false);
  double sum = 0;
  for (double a : r.alpha.data) sum += a;
  const double cov = sum / static_cast<double>(r.alpha.data.size());
  cache.emplace(std::string(entity), cov);
  return cov;
}

}  // namespace provgen::generator
