#include "provgen/reviewer/scorer.hpp"

#include <algorithm>
#include <cmath>

#include "provgen/core/color.hpp"
#include "provgen/core/digest.hpp"
#include "provgen/core/error.hpp"
#include "provgen/core/ppm.hpp"
#include "provgen/generator/glyph.hpp"
#include "provgen/planner/lexicon.hpp"

namespace provgen::reviewer {

std::string_view to_string(ScorerKind kind) { return kind == ScorerKind::kStub ? "stub" : "external"; }

nlohmann::json to_json(const AlignmentScore& s) {
  return {{"value", s.value},
          {"scorer", to_string(s.scorer)},
          {"details",
           {{"object_presence", s.details.object_presence},
            {"attribute_match", s.details.attribute_match},
            {"artifact_flag", s.details.artifact_flag}}}};
}

namespace {

constexpr std::array<double, 3> kSizeAreas{0.36, 0.64, 1.0};

std::vector<std::string_view> vocabulary() {
  std::vector<std::string_view> v(planner::entity_nouns().begin(), planner::entity_nouns().end());
  v.push_back(planner::kSkyEntity);
  v.push_back(planner::kNeutralBackdrop);
  return v;
}

std::vector<double> entity_onehot(std::string_view name) {
  static const std::vector<std::string_view> vocab = vocabulary();
  std::vector<double> out(vocab.size() + 1, 0.0);
  if (name.empty()) return out;
  const auto it = std::find(vocab.begin(), vocab.end(), name);
  out[static_cast<std::size_t>(it - vocab.begin())] = 1.0;  // unknown names share the last slot
  return out;
}

bool has_artifacts(const generator::Component& c) {
  for (float v : c.image.samples()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) return true;
  }
  for (double a : c.alpha.data) {
    if (!std::isfinite(a) || a < 0.0 || a > 1.0) return true;
  }
  return false;
}

}  // namespace

std::array<double, 12> hue_histogram(const generator::Component& c) {
  std::array<double, 12> h{};
  const bool has_alpha = !c.alpha.data.empty();
  for (int y = 0; y < c.image.height(); ++y) {
    for (int x = 0; x < c.image.width(); ++x) {
      if (has_alpha && c.alpha.at(x, y) < kOpaqueAlpha) continue;
      const Hsv hsv = rgb_to_hsv({c.image.at(x, y, 0), c.image.at(x, y, 1), c.image.at(x, y, 2)});
      if (hsv.s < kMinSaturation || hsv.v < kMinValue) continue;
      h[static_cast<std::size_t>(planner::hue_bin(hsv.h))] += 1.0;
    }
  }
  return h;
}

double part_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

AttributeVector expected_vector(const planner::Subtask& s) {
  AttributeVector v;
  if (s.attributes.color) {
    const auto idx = planner::color_index(*s.attributes.color);
    if (!idx) throw Error(ErrorCode::kInvalidArgument, "unknown color tag '" + *s.attributes.color + "'");
    v.hue.assign(12, 0.0);
    v.hue[static_cast<std::size_t>(*idx)] = 1.0;
  }
  if (s.attributes.size && !s.is_background()) {
    v.size.assign(3, 0.0);
    v.size[static_cast<std::size_t>(*s.attributes.size)] = 1.0;
  }
  v.entity = entity_onehot(s.entity);
  return v;
}

AttributeVector measured_vector(const generator::Component& c, const planner::Subtask& s) {
  AttributeVector v;
  if (s.attributes.color) {
    const auto h = hue_histogram(c);
    v.hue.assign(h.begin(), h.end());
  }
  if (s.attributes.size && !s.is_background()) {
    double mean_alpha = 0;
    for (double a : c.alpha.data) mean_alpha += a;
    mean_alpha /= std::max<std::size_t>(c.alpha.data.size(), 1);
    double ref = 1.0;
    if (generator::has_glyph(s.entity)) ref = generator::reference_coverage(s.entity);
    const double area = mean_alpha / ref;
    std::size_t best = 0;
    for (std::size_t i = 1; i < kSizeAreas.size(); ++i) {
      if (std::fabs(area - kSizeAreas[i]) < std::fabs(area - kSizeAreas[best])) best = i;
    }
    v.size.assign(3, 0.0);
    v.size[best] = 1.0;
  }
  v.entity = entity_onehot(c.glyph);
  return v;
}

double combine(const AttributeVector& e, const AttributeVector& m, ScoreDetails* details) {
  const double hue = part_cosine(e.hue, m.hue);
  const double size = part_cosine(e.size, m.size);
  const double entity = part_cosine(e.entity, m.entity);
  if (details != nullptr) {
    details->object_presence = entity;
    details->attribute_match = (kHueWeight * hue + kSizeWeight * size) / (kHueWeight + kSizeWeight);
  }
  return std::clamp(kHueWeight * hue + kSizeWeight * size + kEntityWeight * entity, 0.0, 1.0);
}

AlignmentScore StubScorer::score(const generator::Component& component, const PromptText&,
                                 const planner::Subtask& subtask) {
  AlignmentScore out;
  out.scorer = ScorerKind::kStub;
  out.details.artifact_flag = has_artifacts(component);
  if (out.details.artifact_flag) return out;
  out.value = combine(expected_vector(subtask), measured_vector(component, subtask), &out.details);
  return out;
}

ExternalScorer::ExternalScorer(std::string base_url, std::chrono::milliseconds timeout)
    : endpoint_(parse_endpoint(base_url)), timeout_(timeout) {}

AlignmentScore ExternalScorer::score(const generator::Component& component, const PromptText& prompt,
                                     const planner::Subtask& subtask) {
  const auto ppm = encode_ppm(component.image);
  planner::SubtaskPlan one;
  one.subtasks.push_back(subtask);
  const nlohmann::json request{{"image", base64_encode(ppm)},
                               {"image_format", "ppm"},
                               {"prompt", prompt.text},
                               {"subtask", planner::to_json(one).at("subtasks").at(0)}};
  const HttpReply reply = post_json(endpoint_, "/score", request, timeout_, ErrorCode::kScorerUnavailable);
  AlignmentScore out;
  out.scorer = ScorerKind::kExternal;
  try {
    const auto body = nlohmann::json::parse(reply.body);
    out.value = body.at("score").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kScorerUnavailable, std::string("scorer reply malformed: ") + e.what());
  }
  if (!std::isfinite(out.value) || out.value < 0.0 || out.value > 1.0) {
    throw Error(ErrorCode::kScorerUnavailable, "scorer returned a score outside [0,1]");
  }
  out.details.object_presence = out.value;
  out.details.attribute_match = out.value;
  return out;
}

}  // namespace provgen::reviewer
