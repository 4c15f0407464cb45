#pragma once

#include <chrono>
#include <string>

#include "provgen/core/config.hpp"
#include "provgen/core/prompt.hpp"
#include "provgen/planner/plan.hpp"

namespace provgen::planner {

class Planner {
 public:
  virtual ~Planner() = default;
  virtual SubtaskPlan plan(const PromptText& prompt, const PipelineConfig& config) = 0;
};

class GrammarPlanner final : public Planner {
 public:
  SubtaskPlan plan(const PromptText& prompt, const PipelineConfig& config) override;
};

/// POSTs {prompt, template_id} to `<base_url>/plan` and strictly validates
/// the returned plan JSON. Transport failures and non-2xx responses map to
/// kPlannerUnavailable; schema violations to kInvalidPlan.
class ExternalPlanner final : public Planner {
 public:
  explicit ExternalPlanner(std::string base_url, std::string template_id = "fewshot-v1",
                           std::chrono::milliseconds timeout = std::chrono::seconds(30));

  SubtaskPlan plan(const PromptText& prompt, const PipelineConfig& config) override;

 private:
  std::string base_url_;
  std::string template_id_;
  std::chrono::milliseconds timeout_;
};

}  // namespace provgen::planner
