#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "provgen/core/config.hpp"
#include "provgen/core/prompt.hpp"
#include "provgen/planner/plan.hpp"

namespace provgen::planner {

struct EntityClause {
  std::string noun;
  std::vector<std::string> modifiers;  // color, size and style words
  std::optional<std::string> pose;
  std::optional<GridCell> anchor;
};

struct RelationClause {
  int subject = 0;  // clause indices
  Relation relation = Relation::kAbove;
  int object = 0;
  std::size_t token_count = 0;
};

struct PromptAST {
  std::vector<EntityClause> clauses;
  std::vector<RelationClause> relations;
  std::optional<std::string> background;
  std::vector<std::string> tokens;
  std::vector<std::string> unparsed;
  std::size_t consumed = 0;
};

/// Grammar: entity clauses (article? modifiers noun pose? anchor?) joined by
/// "and" or a relation, plus an optional "at <sunset|night|noon>". A definite
/// article before a noun already mentioned refers back to that entity.
/// Throws kNoEntityFound when no clause parses.
PromptAST parse_prompt(const PromptText& prompt);

/// One foreground subtask per clause, then the background subtask. Throws
/// kCyclicLayout on contradictory relations.
SubtaskPlan decompose(const PromptAST& ast, const PipelineConfig& config);

struct PlanEdit {
  struct SetAttribute {
    int id = 0;
    std::string key;    // color | size | pose | style
    std::string value;  // empty clears
  };
  struct SetAnchor {
    int id = 0;
    std::optional<GridCell> cell;  // nullopt clears the constraint
  };
  struct SetRelation {
    int id = 0;
    Relation relation = Relation::kAbove;
    int target = 0;
  };
  struct Remove {
    int id = 0;
  };
  struct Add {
    std::string entity;
    Attributes attributes;
    std::optional<LayoutConstraint> layout;
    SubtaskKind kind = SubtaskKind::kForeground;
  };

  std::variant<SetAttribute, SetAnchor, SetRelation, Remove, Add> op;
};

nlohmann::json to_json(const PlanEdit& edit);
PlanEdit plan_edit_from_json(const nlohmann::json& j);

/// Returns a re-validated copy with `edit` applied. Throws kUnknownSubtask,
/// kCyclicLayout or kInvalidPlan.
SubtaskPlan apply_plan_edit(const SubtaskPlan& plan, const PlanEdit& edit);

/// Subtask ids touched by `edit` (added id included) for regeneration.
std::vector<int> edited_subtasks(const SubtaskPlan& before, const SubtaskPlan& after);

}  // namespace provgen::planner
