#include "provgen/core/config.hpp"

#include <cmath>
#include <set>

#include "provgen/core/error.hpp"

namespace provgen {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "config: " + what);
}

std::string_view policy_name(ReviewPolicy p) {
  return p == ReviewPolicy::kStrict ? "strict" : "accept-best";
}

ReviewPolicy parse_policy(const std::string& s) {
  if (s == "strict") return ReviewPolicy::kStrict;
  if (s == "accept-best") return ReviewPolicy::kAcceptBest;
  throw Error(ErrorCode::kInvalidArgument, "config: unknown review_policy '" + s + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  require(std::isfinite(tau) && tau >= 0.0 && tau <= 1.0, "tau must lie in [0,1]");
  require(max_retries >= 0, "max_retries must be non-negative");
  require(std::isfinite(lambda) && lambda >= 0.0 && lambda <= kLambdaCap,
          "lambda must lie in [0, 0.05]");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be non-negative");
  require(scene_size >= 32 && scene_size % 8 == 0 && scene_size <= 4096,
          "scene_size must be a multiple of 8 in [32, 4096]");
  require(component_resolution >= 32 && component_resolution <= 2048,
          "component_resolution must lie in [32, 2048]");
  require(std::isfinite(amplitude) && amplitude >= 0.0, "amplitude must be non-negative");
  require(chips_per_bit >= 0, "chips_per_bit must be non-negative");
  require(!planner_model.empty() && !generator_model.empty(), "model identifiers must be set");
}

nlohmann::json to_json(const PipelineConfig& c) {
  return nlohmann::json{
      {"planner_model", c.planner_model},
      {"generator_model", c.generator_model},
      {"tau", c.tau},
      {"max_retries", c.max_retries},
      {"lambda", c.lambda},
      {"alpha", c.alpha},
      {"ablations",
       {{"no_reviewer", c.ablations.no_reviewer},
        {"no_integration", c.ablations.no_integration},
        {"posthoc_protection", c.ablations.posthoc_protection},
        {"no_hitl", c.ablations.no_hitl}}},
      {"seed", c.seed},
      {"scene_size", c.scene_size},
      {"component_resolution", c.component_resolution},
      {"review_policy", policy_name(c.review_policy)},
      {"amplitude", c.amplitude},
      {"chips_per_bit", c.chips_per_bit},
      {"quick_suite", c.quick_suite},
      {"user_hash", c.user_hash},
  };
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "planner_model", "generator_model", "tau",          "max_retries",
      "lambda",        "alpha",           "ablations",    "seed",
      "scene_size",    "component_resolution", "review_policy", "amplitude",
      "chips_per_bit", "quick_suite",     "user_hash"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::kInvalidArgument, "config: unknown field '" + key + "'");
  }
  PipelineConfig c;
  try {
    c.planner_model = j.value("planner_model", c.planner_model);
    c.generator_model = j.value("generator_model", c.generator_model);
    c.tau = j.value("tau", c.tau);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.lambda = j.value("lambda", c.lambda);
    c.alpha = j.value("alpha", c.alpha);
    if (j.contains("ablations")) {
      const auto& a = j.at("ablations");
      static const std::set<std::string> kFlags = {"no_reviewer", "no_integration",
                                                   "posthoc_protection", "no_hitl"};
      for (const auto& [key, _] : a.items()) {
        if (!kFlags.contains(key)) throw Error(ErrorCode::kInvalidArgument, "config: unknown ablation '" + key + "'");
      }
      c.ablations.no_reviewer = a.value("no_reviewer", false);
      c.ablations.no_integration = a.value("no_integration", false);
      c.ablations.posthoc_protection = a.value("posthoc_protection", false);
      c.ablations.no_hitl = a.value("no_hitl", false);
    }
    c.seed = j.value("seed", c.seed);
    c.scene_size = j.value("scene_size", c.scene_size);
    c.component_resolution = j.value("component_resolution", c.component_resolution);
    if (j.contains("review_policy")) c.review_policy = parse_policy(j.at("review_policy").get<std::string>());
    c.amplitude = j.value("amplitude", c.amplitude);
    c.chips_per_bit = j.value("chips_per_bit", c.chips_per_bit);
    c.quick_suite = j.value("quick_suite", c.quick_suite);
    c.user_hash = j.value("user_hash", c.user_hash);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace provgen
