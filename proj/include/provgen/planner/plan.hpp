#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace provgen::planner {

enum class SubtaskKind { kForeground, kBackground };
enum class SizeClass { kSmall, kMedium, kLarge };
enum class PlanSource { kGrammar, kExternal };

enum class GridCell {
  kUpperLeft, kUpperCenter, kUpperRight,
  kMiddleLeft, kCenter, kMiddleRight,
  kLowerLeft, kLowerCenter, kLowerRight,
};

enum class Relation { kAbove, kBelow, kLeftOf, kRightOf, kOver };

inline int cell_row(GridCell c) { return static_cast<int>(c) / 3; }
inline int cell_col(GridCell c) { return static_cast<int>(c) % 3; }

std::string_view to_string(GridCell cell);
std::string_view to_string(Relation relation);
std::string_view to_string(SizeClass size);
std::optional<GridCell> parse_cell(std::string_view token);
std::optional<SizeClass> parse_size(std::string_view token);
std::optional<Relation> parse_relation(std::string_view token);

struct Attributes {
  std::optional<std::string> color;  // color-term tag
  std::optional<SizeClass> size;
  std::optional<std::string> pose;
  std::vector<std::string> styles;

  bool operator==(const Attributes&) const = default;
};

struct RelativePlacement {
  int target = 0;
  Relation relation = Relation::kAbove;

  bool operator==(const RelativePlacement&) const = default;
};

struct LayoutConstraint {
  std::variant<GridCell, RelativePlacement> position;
  int depth = 1;  // larger = nearer

  bool operator==(const LayoutConstraint&) const = default;
};

struct Subtask {
  int id = 0;
  std::string entity;
  Attributes attributes;
  std::optional<LayoutConstraint> layout;
  SubtaskKind kind = SubtaskKind::kForeground;

  int depth() const;
  bool is_background() const { return kind == SubtaskKind::kBackground; }
  bool operator==(const Subtask&) const = default;
};

struct SubtaskPlan {
  std::vector<Subtask> subtasks;
  double coverage = 1.0;
  PlanSource source = PlanSource::kGrammar;

  const Subtask* find(int id) const;
  Subtask* find(int id);
  std::size_t foreground_count() const;
  bool operator==(const SubtaskPlan&) const = default;
};

/// Checks every structural invariant: unique ids, non-empty entities, exactly
/// one background and at least one foreground, coverage in (0,1], relation
/// targets present, acyclic and satisfiable layout. Throws kInvalidPlan,
/// kCyclicLayout or kUnsatisfiableLayout.
void validate_plan(const SubtaskPlan& plan);

// Plan JSON document ("provgen.plan/1"): {schema, source, coverage,
// subtasks: [{id, object, kind, attributes, constraints, depth}]}.
nlohmann::json to_json(const SubtaskPlan& plan);
/// Strict parse; unknown fields or malformed values throw kInvalidPlan.
SubtaskPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Attributes& attributes);
Attributes attributes_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LayoutConstraint& layout);
LayoutConstraint layout_from_json(const nlohmann::json& j);

/// Surrogate planner loss: -ln(coverage). Zero iff coverage == 1.
double plan_loss(const SubtaskPlan& plan);

}  // namespace provgen::planner
