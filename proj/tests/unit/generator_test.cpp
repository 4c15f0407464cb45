#include <cmath>

#include "provgen/core/color.hpp"
#include "provgen/core/png_codec.hpp"
#include "provgen/core/ppm.hpp"
#include "provgen/generator/generator.hpp"
#include "provgen/generator/glyph.hpp"
#include "provgen/planner/lexicon.hpp"
#include "support.hpp"

using namespace provgen;
using namespace provgen::generator;
using planner::Subtask;

namespace {

Subtask fg(const std::string& entity, std::optional<std::string> color = std::nullopt, int id = 0) {
  Subtask s;
  s.id = id;
  s.entity = entity;
  s.attributes.color = std::move(color);
  return s;
}

Subtask bg(const std::string& phrase) {
  Subtask s;
  s.id = 9;
  s.entity = "sky";
  s.kind = planner::SubtaskKind::kBackground;
  s.attributes.styles = {phrase};
  return s;
}

double fraction_in_hue_range(const Component& c, const std::string& color) {
  const int want = *planner::color_index(color);
  int opaque = 0, inside = 0;
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      if (c.alpha.at(x, y) < 0.5) continue;
      ++opaque;
      const Hsv hsv = rgb_to_hsv({c.image.at(x, y, 0), c.image.at(x, y, 1), c.image.at(x, y, 2)});
      inside += planner::hue_bin(hsv.h) == want ? 1 : 0;
    }
  }
  return opaque ? static_cast<double>(inside) / opaque : 0.0;
}

}  // namespace

TEST(Generator, DeterministicPerSeed) {
  ProceduralGenerator gen;
  const GeneratorParams params;
  const Component a = gen.generate(fg("dragon", "red"), 7, params);
  const Component b = gen.generate(fg("dragon", "red"), 7, params);
  EXPECT_EQ(encode_ppm(a.image), encode_ppm(b.image));
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.attempt, 0);
  EXPECT_EQ(a.seed_used, 7u);
  EXPECT_EQ(a.glyph, "dragon");
  const Component c = gen.generate(fg("dragon", "red"), 8, params);
  EXPECT_NE(encode_ppm(a.image), encode_ppm(c.image));
}

TEST(Generator, PurityAcrossRandomSubtasks) {
  ProceduralGenerator gen;
  GeneratorParams params;
  params.resolution = 48;
  Rng rng(21);
  const auto nouns = planner::entity_nouns();
  const auto colors = planner::color_terms();
  for (int i = 0; i < 100; ++i) {
    const Subtask s = fg(std::string(nouns[rng.below(nouns.size())]),
                         rng.uniform() < 0.5 ? std::optional<std::string>(colors[rng.below(colors.size())].name)
                                             : std::nullopt);
    const std::uint64_t seed = rng.next();
    const Component a = gen.generate(s, seed, params);
    const Component b = gen.generate(s, seed, params);
    ASSERT_EQ(a.image, b.image);
    ASSERT_EQ(a.alpha, b.alpha);
  }
}

TEST(Generator, ForegroundAlphaAndBackgroundOpacity) {
  ProceduralGenerator gen;
  const Component c = gen.generate(fg("circle", "blue"), 1, {});
  EXPECT_EQ(c.width(), 128);
  EXPECT_EQ(c.alpha.at(0, 0), 0.0);
  EXPECT_EQ(c.alpha.at(127, 127), 0.0);
  EXPECT_GT(c.alpha.at(64, 64), 0.99);
  for (double a : c.alpha.data) {
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
  }
  const Component sky = gen.generate(bg("night"), 1, {});
  for (double a : sky.alpha.data) ASSERT_EQ(a, 1.0);
  EXPECT_TRUE(c.image.valid());
  EXPECT_TRUE(sky.image.valid());
}

TEST(Generator, SunsetTopRowIsWarm) {
  ProceduralGenerator gen;
  for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
    const Component sky = gen.generate(bg("sunset"), seed, {});
    double r = 0, g = 0, b = 0;
    for (int x = 0; x < sky.width(); ++x) {
      r += sky.image.at(x, 0, 0);
      g += sky.image.at(x, 0, 1);
      b += sky.image.at(x, 0, 2);
    }
    const double h = rgb_to_hsv({r / sky.width(), g / sky.width(), b / sky.width()}).h;
    EXPECT_TRUE(h >= 0 && h <= 60) << h;
  }
}

TEST(Generator, UnknownEntityAndBadParams) {
  ProceduralGenerator gen;
  EXPECT_CODE(gen.generate(fg("unicorn"), 1, {}), ErrorCode::kUnknownEntity);
  GeneratorParams small;
  small.resolution = 16;
  EXPECT_CODE(gen.generate(fg("tree"), 1, small), ErrorCode::kInvalidArgument);
  GeneratorParams no_steps;
  no_steps.steps = 0;
  EXPECT_CODE(no_steps.validate(), ErrorCode::kInvalidArgument);
  for (auto noun : planner::entity_nouns()) EXPECT_TRUE(has_glyph(noun)) << noun;
}

TEST(Generator, HueFidelityOfColorTags) {
  // Property: at least 60% of opaque pixels fall inside the tagged hue range.
  ProceduralGenerator gen;
  GeneratorParams params;
  params.resolution = 64;
  Rng rng(5);
  for (auto noun : planner::entity_nouns()) {
    for (const auto& color : planner::color_terms()) {
      const Component c = gen.generate(fg(std::string(noun), std::string(color.name)), rng.next(), params);
      EXPECT_GE(fraction_in_hue_range(c, std::string(color.name)), 0.6) << noun << " " << color.name;
    }
  }
}

TEST(Generator, AttributesModulateGlyph) {
  Subtask small = fg("tree");
  small.attributes.size = planner::SizeClass::kSmall;
  Subtask large = fg("tree");
  large.attributes.size = planner::SizeClass::kLarge;
  ProceduralGenerator gen;
  auto area = [](const Component& c) {
    double s = 0;
    for (double a : c.alpha.data) s += a;
    return s;
  };
  EXPECT_LT(area(gen.generate(small, 3, {})), area(gen.generate(large, 3, {})));
  EXPECT_LT(size_scale(planner::SizeClass::kSmall), size_scale(planner::SizeClass::kMedium));
}

TEST(Regenerate, AttemptsAndSeeds) {
  ProceduralGenerator gen;
  const Subtask s = fg("boat", "teal");
  const Component first = gen.generate(s, 40, {});
  const Component second = regenerate(gen, first, s, {}, 3);
  EXPECT_EQ(second.attempt, 1);
  EXPECT_NE(second.seed_used, first.seed_used);
  EXPECT_EQ(second.seed_used, regeneration_seed(first.seed_used, 1));
  EXPECT_NE(encode_ppm(second.image), encode_ppm(first.image));
  Component spent = second;
  spent.attempt = 3;
  EXPECT_CODE(regenerate(gen, spent, s, {}, 3), ErrorCode::kRetriesExhausted);
  EXPECT_CODE(regenerate(gen, first, s, {}, 0), ErrorCode::kRetriesExhausted);
}

TEST(ExternalGenerator, DecodesPngAndPpm) {
  const Image img = quantize_8bit(testing_support::noise_image(40, 40, 2));
  Plane alpha(40, 40, 0.0);
  alpha.at(10, 10) = 1.0;
  const auto png = encode_png(img, &alpha);
  const auto ppm = encode_ppm(img);
  nlohmann::json seen;
  testing_support::LocalServer server([&](httplib::Server& s) {
    s.Post("/png/generate", [&](const httplib::Request& req, httplib::Response& res) {
      seen = nlohmann::json::parse(req.body);
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    });
    s.Post("/ppm/generate", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(ppm.begin(), ppm.end()), "image/x-portable-pixmap");
    });
    s.Post("/junk/generate", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not an image", "text/plain");
    });
    s.Post("/down/generate", [](const httplib::Request&, httplib::Response& res) { res.status = 502; });
  });

  ExternalGenerator via_png(server.url() + "/png", "sdxl");
  const Component c = via_png.generate(fg("dragon", "red", 4), 77, {});
  EXPECT_EQ(c.image, img);
  EXPECT_EQ(c.alpha, alpha);
  EXPECT_EQ(c.subtask_id, 4);
  EXPECT_EQ(c.seed_used, 77u);
  EXPECT_EQ(seen.at("seed"), 77);
  EXPECT_EQ(seen.at("model"), "sdxl");
  EXPECT_EQ(seen.at("params").at("steps"), 50);
  EXPECT_EQ(seen.at("params").at("guidance_scale"), 7.5);
  EXPECT_EQ(seen.at("params").at("negative_prompt"), "blurry, distorted, low quality");
  EXPECT_EQ(seen.at("subtask").at("object"), "dragon");

  const Component sky = via_png.generate(bg("noon"), 1, {});
  for (double a : sky.alpha.data) ASSERT_EQ(a, 1.0);

  ExternalGenerator via_ppm(server.url() + "/ppm");
  const Component d = via_ppm.generate(fg("tree"), 1, {});
  EXPECT_EQ(d.image, img);
  for (double a : d.alpha.data) ASSERT_EQ(a, 1.0);

  EXPECT_CODE(ExternalGenerator(server.url() + "/junk").generate(fg("tree"), 1, {}), ErrorCode::kGeneratorUnavailable);
  EXPECT_CODE(ExternalGenerator(server.url() + "/down").generate(fg("tree"), 1, {}), ErrorCode::kGeneratorUnavailable);
}
