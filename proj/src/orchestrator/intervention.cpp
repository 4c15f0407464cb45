#include "provgen/orchestrator/intervention.hpp"

#include "provgen/core/digest.hpp"
#include "provgen/core/error.hpp"

namespace provgen::orchestrator {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kInvalidArgument, "intervention: " + what); }

int rank(SessionState s) { return static_cast<int>(s); }

}  // namespace

std::string_view kind_name(const Intervention& iv) {
  return std::visit(overloaded{[](const EditPlan&) { return "EditPlan"; },
                               [](const OverrideReview&) { return "OverrideReview"; },
                               [](const AdjustLayout&) { return "AdjustLayout"; },
                               [](const SetProtectionParams&) { return "SetProtectionParams"; },
                               [](const Abort&) { return "Abort"; }},
                    iv.kind);
}

nlohmann::json to_json(const Intervention& iv) {
  nlohmann::json j = std::visit(
      overloaded{[](const EditPlan& e) { return nlohmann::json{{"edit", planner::to_json(e.edit)}}; },
                 [](const OverrideReview& o) {
                   return nlohmann::json{{"subtask_id", o.subtask_id}, {"accept", o.accept}};
                 },
                 [](const AdjustLayout& a) {
                   nlohmann::json j{{"subtask_id", a.subtask_id}, {"dx", a.dx}, {"dy", a.dy}};
                   if (a.depth) j["depth"] = *a.depth;
                   return j;
                 },
                 [](const SetProtectionParams& p) {
                   nlohmann::json j = nlohmann::json::object();
                   if (p.amplitude) j["amplitude"] = *p.amplitude;
                   if (p.chips_per_bit) j["chips_per_bit"] = *p.chips_per_bit;
                   return j;
                 },
                 [](const Abort& a) { return nlohmann::json{{"reason", a.reason}}; }},
      iv.kind);
  j["kind"] = kind_name(iv);
  j["actor"] = iv.actor;
  return j;
}

Intervention intervention_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("body must be an object");
  Intervention iv;
  std::string kind;
  try {
    kind = j.at("kind").get<std::string>();
    if (j.contains("user") && j.contains("actor")) bad("give either user or actor, not both");
    if (j.contains("user")) iv.actor = hash_user_id(j.at("user").get<std::string>());
    if (j.contains("actor")) iv.actor = j.at("actor").get<std::string>();
    auto allow = [&](std::initializer_list<const char*> keys) {
      for (const auto& [k, _] : j.items()) {
        if (k == "kind" || k == "user" || k == "actor") continue;
        bool ok = false;
        for (const char* a : keys) ok = ok || k == a;
        if (!ok) bad("unexpected field '" + k + "' for " + kind);
      }
    };
    if (kind == "EditPlan") {
      allow({"edit"});
      iv.kind = EditPlan{planner::plan_edit_from_json(j.at("edit"))};
    } else if (kind == "OverrideReview") {
      allow({"subtask_id", "accept"});
      iv.kind = OverrideReview{j.at("subtask_id").get<int>(), j.value("accept", true)};
    } else if (kind == "AdjustLayout") {
      allow({"subtask_id", "dx", "dy", "depth"});
      AdjustLayout a{j.at("subtask_id").get<int>(), j.value("dx", 0), j.value("dy", 0), std::nullopt};
      if (j.contains("depth")) a.depth = j.at("depth").get<int>();
      iv.kind = a;
    } else if (kind == "SetProtectionParams") {
      allow({"amplitude", "chips_per_bit"});
      SetProtectionParams p;
      if (j.contains("amplitude")) p.amplitude = j.at("amplitude").get<double>();
      if (j.contains("chips_per_bit")) p.chips_per_bit = j.at("chips_per_bit").get<int>();
      if (!p.amplitude && !p.chips_per_bit) bad("SetProtectionParams needs amplitude or chips_per_bit");
      iv.kind = p;
    } else if (kind == "Abort") {
      allow({"reason"});
      iv.kind = Abort{j.value("reason", std::string("aborted by user"))};
    } else {
      bad("unknown kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  return iv;
}

bool legal_in(const Intervention& iv, SessionState s) {
  if (is_terminal(s)) return false;
  return std::visit(
      overloaded{[&](const EditPlan&) { return s == SessionState::kPlanned || s == SessionState::kReviewing; },
                 [&](const OverrideReview&) { return s == SessionState::kReviewing; },
                 [&](const AdjustLayout&) {
                   return rank(s) >= rank(SessionState::kPlanned) && rank(s) <= rank(SessionState::kIntegrating);
                 },
                 [&](const SetProtectionParams&) { return rank(s) <= rank(SessionState::kIntegrating); },
                 [&](const Abort&) { return true; }},
      iv.kind);
}

}  // namespace provgen::orchestrator
