#include "provgen/generator/generator.hpp"

#include <algorithm>

#include "provgen/core/error.hpp"
#include "provgen/core/png_codec.hpp"
#include "provgen/core/ppm.hpp"
#include "provgen/generator/glyph.hpp"
#include "provgen/planner/lexicon.hpp"

namespace provgen::generator {

void GeneratorParams::validate() const {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  if (!(guidance_scale > 0)) throw Error(ErrorCode::kInvalidArgument, "guidance_scale must be > 0");
  if (resolution < 32) throw Error(ErrorCode::kInvalidArgument, "resolution must be >= 32");
}

nlohmann::json to_json(const GeneratorParams& p) {
  return {{"steps", p.steps},
          {"guidance_scale", p.guidance_scale},
          {"resolution", p.resolution},
          {"negative_prompt", p.negative_prompt}};
}

Component ProceduralGenerator::generate(const planner::Subtask& subtask, std::uint64_t seed,
                                        const GeneratorParams& params) {
  params.validate();
  Component out;
  out.subtask_id = subtask.id;
  out.seed_used = seed;
  if (subtask.is_background()) {
    std::string phrase;
    for (const auto& s : subtask.attributes.styles) {
      if (planner::find_background(s)) {
        phrase = s;
        break;
      }
    }
    std::optional<double> hue;
    if (subtask.attributes.color) {
      if (auto idx = planner::color_index(*subtask.attributes.color)) {
        hue = planner::color_terms()[static_cast<std::size_t>(*idx)].hue_degrees;
      }
    }
    out.image = render_background(phrase, params.resolution, seed, hue);
    out.alpha = Plane(params.resolution, params.resolution, 1.0);
    out.glyph = subtask.entity;
    return out;
  }
  Raster r = render_glyph(subtask.entity, style_for(subtask), params.resolution, seed);
  out.image = std::move(r.image);
  out.alpha = std::move(r.alpha);
  out.glyph = subtask.entity;
  return out;
}

ExternalGenerator::ExternalGenerator(std::string base_url, std::string model,
                                     std::chrono::milliseconds timeout)
    : endpoint_(parse_endpoint(base_url)), model_(std::move(model)), timeout_(timeout) {}

namespace {

nlohmann::json subtask_json(const planner::Subtask& s) {
  planner::SubtaskPlan one;
  one.subtasks.push_back(s);
  // to_json(plan) carries the canonical subtask encoding; lift it out.
  return planner::to_json(one).at("subtasks").at(0);
}

}  // namespace

Component ExternalGenerator::generate(const planner::Subtask& subtask, std::uint64_t seed,
                                      const GeneratorParams& params) {
  params.validate();
  const nlohmann::json request{{"subtask", subtask_json(subtask)},
                               {"params", to_json(params)},
                               {"seed", seed},
                               {"model", model_}};
  const HttpReply reply =
      post_json(endpoint_, "/generate", request, timeout_, ErrorCode::kGeneratorUnavailable);
  const auto* bytes = reinterpret_cast<const unsigned char*>(reply.body.data());
  const std::span<const unsigned char> view(bytes, reply.body.size());
  Component out;
  out.subtask_id = subtask.id;
  out.seed_used = seed;
  try {
    if (looks_like_png(view)) {
      DecodedRaster d = decode_png(view);
      out.image = std::move(d.image);
      out.alpha = d.alpha ? std::move(*d.alpha) : Plane(out.image.width(), out.image.height(), 1.0);
    } else {
      out.image = decode_ppm(view);
      out.alpha = Plane(out.image.width(), out.image.height(), 1.0);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kGeneratorUnavailable, std::string("generator returned an unusable image: ") + e.what());
  }
  if (subtask.is_background()) std::fill(out.alpha.data.begin(), out.alpha.data.end(), 1.0);
  return out;
}

std::uint64_t regeneration_seed(std::uint64_t seed, int next_attempt) {
  return seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(next_attempt);
}

Component regenerate(Generator& generator, const Component& component, const planner::Subtask& subtask,
                     const GeneratorParams& params, int max_retries) {
  if (component.attempt >= max_retries) {
    throw Error(ErrorCode::kRetriesExhausted,
                "subtask " + std::to_string(subtask.id) + " used " + std::to_string(component.attempt) + " of " +
                    std::to_string(max_retries) + " retries");
  }
  const int next = component.attempt + 1;
  Component out = generator.generate(subtask, regeneration_seed(component.seed_used, next), params);
  out.attempt = next;
  return out;
}

}  // namespace provgen::generator
