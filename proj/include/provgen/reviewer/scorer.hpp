#pragma once

#include <array>
#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/core/endpoint.hpp"
#include "provgen/core/prompt.hpp"
#include "provgen/generator/component.hpp"
#include "provgen/planner/plan.hpp"

namespace provgen::reviewer {

enum class ScorerKind { kStub, kExternal };
std::string_view to_string(ScorerKind kind);

struct ScoreDetails {
  double object_presence = 0;
  double attribute_match = 0;
  bool artifact_flag = false;
};

struct AlignmentScore {
  double value = 0;
  ScorerKind scorer = ScorerKind::kStub;
  ScoreDetails details;
};

nlohmann::json to_json(const AlignmentScore& score);

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual AlignmentScore score(const generator::Component& component, const PromptText& prompt,
                               const planner::Subtask& subtask) = 0;
};

// Part weights of the stub score; they sum to 1. The weighted mean of part
// cosines is the cosine of the concatenated vectors with part i scaled to
// length sqrt(w_i).
inline constexpr double kHueWeight = 0.65;
inline constexpr double kSizeWeight = 0.10;
inline constexpr double kEntityWeight = 0.25;
inline constexpr double kOpaqueAlpha = 0.5;
inline constexpr double kMinSaturation = 0.15;
inline constexpr double kMinValue = 0.1;

/// Attribute vector split into its three parts. A part that the subtask does
/// not constrain is left empty in both expected and measured vectors.
struct AttributeVector {
  std::vector<double> hue;     // 12 hue-range bins
  std::vector<double> size;    // small, medium, large
  std::vector<double> entity;  // one-hot over the entity vocabulary
};

AttributeVector expected_vector(const planner::Subtask& subtask);
AttributeVector measured_vector(const generator::Component& component, const planner::Subtask& subtask);

/// Histogram of hue bins over opaque, saturated pixels.
std::array<double, 12> hue_histogram(const generator::Component& component);

/// Cosine of two non-negative vectors; two all-zero vectors give 1.
double part_cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Weighted mean of per-part cosines.
double combine(const AttributeVector& expected, const AttributeVector& measured, ScoreDetails* details = nullptr);

class StubScorer final : public Scorer {
 public:
  AlignmentScore score(const generator::Component& component, const PromptText& prompt,
                       const planner::Subtask& subtask) override;
};

/// POSTs {image: base64 PPM, prompt, subtask} to <base>/score, expects {score}.
class ExternalScorer final : public Scorer {
 public:
  explicit ExternalScorer(std::string base_url,
                          std::chrono::milliseconds timeout = std::chrono::seconds(30));
  AlignmentScore score(const generator::Component& component, const PromptText& prompt,
                       const planner::Subtask& subtask) override;

 private:
  HttpEndpoint endpoint_;
  std::chrono::milliseconds timeout_;
};

}  // namespace provgen::reviewer
