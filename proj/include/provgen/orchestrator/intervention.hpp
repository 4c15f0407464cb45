#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "provgen/core/session.hpp"
#include "provgen/planner/grammar.hpp"

namespace provgen::orchestrator {

struct EditPlan {
  planner::PlanEdit edit;
};

struct OverrideReview {
  int subtask_id = 0;
  bool accept = true;  // false queues a fresh attempt
};

struct AdjustLayout {
  int subtask_id = 0;
  int dx = 0;
  int dy = 0;
  std::optional<int> depth;
};

struct SetProtectionParams {
  std::optional<double> amplitude;
  std::optional<int> chips_per_bit;
};

struct Abort {
  std::string reason;
};

struct Intervention {
  std::variant<Abort, EditPlan, OverrideReview, AdjustLayout, SetProtectionParams> kind;
  std::string actor;  // hashed user id, never the raw identity
};

std::string_view kind_name(const Intervention& intervention);

/// Wire form: {"kind": "EditPlan", "edit": {...}} and so on, plus an optional
/// "user" (raw id, hashed here) or "actor" (already hashed).
nlohmann::json to_json(const Intervention& intervention);
Intervention intervention_from_json(const nlohmann::json& j);

/// Whether the intervention kind may be submitted in `state`.
bool legal_in(const Intervention& intervention, SessionState state);

}  // namespace provgen::orchestrator
