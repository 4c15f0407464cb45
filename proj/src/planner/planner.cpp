#include "provgen/planner/planner.hpp"

#include "provgen/core/endpoint.hpp"
#include "provgen/planner/grammar.hpp"

namespace provgen::planner {

SubtaskPlan GrammarPlanner::plan(const PromptText& prompt, const PipelineConfig& config) {
  return decompose(parse_prompt(prompt), config);
}

ExternalPlanner::ExternalPlanner(std::string base_url, std::string template_id,
                                 std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), template_id_(std::move(template_id)), timeout_(timeout) {}

SubtaskPlan ExternalPlanner::plan(const PromptText& prompt, const PipelineConfig& config) {
  const nlohmann::json request{{"prompt", prompt.text},
                               {"template_id", template_id_},
                               {"model", config.planner_model}};
  const HttpReply reply = post_json(parse_endpoint(base_url_), "/plan", request, timeout_,
                                    ErrorCode::kPlannerUnavailable);
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(reply.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidPlan, std::string("planner response is not JSON: ") + e.what());
  }
  SubtaskPlan plan = plan_from_json(body);
  plan.source = PlanSource::kExternal;
  return plan;
}

}  // namespace provgen::planner
