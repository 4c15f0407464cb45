#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace provgen {

/// Runtime switches reproducing the four ablation configurations.
struct Ablations {
  bool no_reviewer = false;
  bool no_integration = false;
  bool posthoc_protection = false;
  bool no_hitl = false;

  bool operator==(const Ablations&) const = default;
};

enum class ReviewPolicy {
  kAcceptBest,  // keep the best attempt and flag it when retries run out
  kStrict,      // fail the session when a component never clears tau
};

struct PipelineConfig {
  std::string planner_model = "grammar-v1";
  std::string generator_model = "procedural-v1";
  double tau = 0.25;
  int max_retries = 3;
  // RMS pixel-perturbation budget for the watermark; the chip amplitude must
  // respect it.
  double lambda = 0.01;
  double alpha = 1.0;
  Ablations ablations;
  std::uint64_t seed = 0;

  int scene_size = 256;
  int component_resolution = 128;
  ReviewPolicy review_policy = ReviewPolicy::kAcceptBest;
  double amplitude = 0.024;
  int chips_per_bit = 0;  // 0 selects floor(slots / 64)
  bool quick_suite = true;
  std::string user_hash;

  static constexpr double kLambdaCap = 0.05;

  /// Throws kInvalidArgument when any field is out of range.
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

nlohmann::json to_json(const PipelineConfig& config);
/// Strict: unknown keys are rejected; missing keys take defaults.
PipelineConfig config_from_json(const nlohmann::json& j);

}  // namespace provgen
