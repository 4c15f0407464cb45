#include "provgen/planner/plan.hpp"

#include <array>
#include <cmath>
#include <set>

#include "provgen/core/error.hpp"
#include "provgen/planner/grid.hpp"
#include "provgen/planner/lexicon.hpp"

namespace provgen::planner {

namespace {

constexpr std::array<std::string_view, 9> kCellNames{
    "upper-left", "upper-center", "upper-right", "middle-left", "center",
    "middle-right", "lower-left", "lower-center", "lower-right"};

constexpr std::array<std::string_view, 5> kRelationNames{"above", "below", "left-of", "right-of", "over"};
constexpr std::array<std::string_view, 3> kSizeNames{"small", "medium", "large"};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidPlan, "plan: " + what);
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, std::string_view where) {
  if (!j.is_object()) invalid(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) invalid("unknown field '" + key + "' in " + std::string(where));
  }
}

}  // namespace

std::string_view to_string(GridCell cell) { return kCellNames[static_cast<int>(cell)]; }
std::string_view to_string(Relation relation) { return kRelationNames[static_cast<int>(relation)]; }
std::string_view to_string(SizeClass size) { return kSizeNames[static_cast<int>(size)]; }

std::optional<GridCell> parse_cell(std::string_view token) {
  struct Alias {
    std::string_view name;
    GridCell cell;
  };
  static constexpr std::array<Alias, 12> kAliases{{
      {"top-left", GridCell::kUpperLeft},     {"top-center", GridCell::kUpperCenter},
      {"top-right", GridCell::kUpperRight},   {"center-left", GridCell::kMiddleLeft},
      {"middle", GridCell::kCenter},          {"center-right", GridCell::kMiddleRight},
      {"bottom-left", GridCell::kLowerLeft},  {"bottom-center", GridCell::kLowerCenter},
      {"bottom-right", GridCell::kLowerRight}, {"middle-center", GridCell::kCenter},
      {"upper-middle", GridCell::kUpperCenter}, {"lower-middle", GridCell::kLowerCenter},
  }};
  for (std::size_t i = 0; i < kCellNames.size(); ++i) {
    if (kCellNames[i] == token) return static_cast<GridCell>(i);
  }
  for (const auto& a : kAliases) {
    if (a.name == token) return a.cell;
  }
  return std::nullopt;
}

std::optional<SizeClass> parse_size(std::string_view token) {
  for (std::size_t i = 0; i < kSizeNames.size(); ++i) {
    if (kSizeNames[i] == token) return static_cast<SizeClass>(i);
  }
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view token) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (kRelationNames[i] == token) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

int Subtask::depth() const {
  if (layout) return layout->depth;
  return is_background() ? 0 : 1;
}

const Subtask* SubtaskPlan::find(int id) const {
  for (const auto& s : subtasks) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Subtask* SubtaskPlan::find(int id) {
  for (auto& s : subtasks) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::size_t SubtaskPlan::foreground_count() const {
  std::size_t n = 0;
  for (const auto& s : subtasks) n += s.is_background() ? 0 : 1;
  return n;
}

void validate_plan(const SubtaskPlan& plan) {
  if (plan.subtasks.empty()) invalid("no subtasks");
  if (!(plan.coverage > 0.0 && plan.coverage <= 1.0)) invalid("coverage must lie in (0,1]");
  std::set<int> ids;
  std::size_t backgrounds = 0;
  for (const auto& s : plan.subtasks) {
    if (!ids.insert(s.id).second) invalid("duplicate subtask id " + std::to_string(s.id));
    if (s.entity.empty()) invalid("empty entity in subtask " + std::to_string(s.id));
    if (s.is_background()) {
      ++backgrounds;
      if (s.layout) invalid("background subtask cannot carry a layout constraint");
    }
    if (s.attributes.color && !color_index(*s.attributes.color)) {
      invalid("unknown color tag '" + *s.attributes.color + "'");
    }
  }
  if (backgrounds > 1) invalid("more than one background subtask");
  if (plan.foreground_count() == 0) invalid("plan needs at least one foreground subtask");
  for (const auto& s : plan.subtasks) {
    if (!s.layout) continue;
    if (const auto* rel = std::get_if<RelativePlacement>(&s.layout->position)) {
      const Subtask* target = plan.find(rel->target);
      if (target == nullptr) invalid("relation target " + std::to_string(rel->target) + " does not exist");
      if (target->is_background()) invalid("relations cannot target the background");
    }
  }
  resolve_grid(plan);
}

nlohmann::json to_json(const Attributes& a) {
  nlohmann::json j = nlohmann::json::object();
  if (a.color) j["color"] = *a.color;
  if (a.size) j["size"] = to_string(*a.size);
  if (a.pose) j["pose"] = *a.pose;
  if (!a.styles.empty()) j["style"] = a.styles;
  return j;
}

Attributes attributes_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"color", "size", "pose", "style"}, "attributes");
  Attributes a;
  try {
    if (j.contains("color")) a.color = j.at("color").get<std::string>();
    if (j.contains("size")) {
      a.size = parse_size(j.at("size").get<std::string>());
      if (!a.size) invalid("unknown size '" + j.at("size").get<std::string>() + "'");
    }
    if (j.contains("pose")) a.pose = j.at("pose").get<std::string>();
    if (j.contains("style")) a.styles = j.at("style").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("attributes: ") + e.what());
  }
  return a;
}

nlohmann::json to_json(const LayoutConstraint& l) {
  nlohmann::json j{{"depth", l.depth}};
  if (const auto* cell = std::get_if<GridCell>(&l.position)) {
    j["anchor"] = to_string(*cell);
  } else {
    const auto& rel = std::get<RelativePlacement>(l.position);
    j["relation"] = to_string(rel.relation);
    j["relative_to"] = rel.target;
  }
  return j;
}

LayoutConstraint layout_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"anchor", "relation", "relative_to", "depth"}, "constraints");
  LayoutConstraint l;
  try {
    l.depth = j.value("depth", 1);
    if (j.contains("anchor")) {
      if (j.contains("relation") || j.contains("relative_to")) invalid("constraint has both anchor and relation");
      const auto cell = parse_cell(j.at("anchor").get<std::string>());
      if (!cell) invalid("unknown anchor '" + j.at("anchor").get<std::string>() + "'");
      l.position = *cell;
    } else if (j.contains("relation") && j.contains("relative_to")) {
      const auto rel = parse_relation(j.at("relation").get<std::string>());
      if (!rel) invalid("unknown relation '" + j.at("relation").get<std::string>() + "'");
      l.position = RelativePlacement{j.at("relative_to").get<int>(), *rel};
    } else {
      invalid("constraint needs an anchor or a relation with relative_to");
    }
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("constraints: ") + e.what());
  }
  return l;
}

nlohmann::json to_json(const SubtaskPlan& plan) {
  nlohmann::json subtasks = nlohmann::json::array();
  for (const auto& s : plan.subtasks) {
    subtasks.push_back({
        {"id", s.id},
        {"object", s.entity},
        {"kind", s.is_background() ? "background" : "foreground"},
        {"attributes", to_json(s.attributes)},
        {"constraints", s.layout ? to_json(*s.layout) : nlohmann::json(nullptr)},
    });
  }
  return {{"schema", "provgen.plan/1"},
          {"source", plan.source == PlanSource::kGrammar ? "grammar" : "external"},
          {"coverage", plan.coverage},
          {"subtasks", subtasks}};
}

SubtaskPlan plan_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"schema", "source", "coverage", "subtasks"}, "plan");
  SubtaskPlan plan;
  try {
    if (j.value("schema", "") != "provgen.plan/1") invalid("unsupported schema");
    const std::string source = j.value("source", "external");
    if (source == "grammar") {
      plan.source = PlanSource::kGrammar;
    } else if (source == "external") {
      plan.source = PlanSource::kExternal;
    } else {
      invalid("unknown source '" + source + "'");
    }
    plan.coverage = j.value("coverage", 1.0);
    if (!j.contains("subtasks") || !j.at("subtasks").is_array()) invalid("subtasks must be an array");
    for (const auto& item : j.at("subtasks")) {
      reject_unknown(item, {"id", "object", "kind", "attributes", "constraints"}, "subtask");
      Subtask s;
      s.id = item.at("id").get<int>();
      s.entity = item.at("object").get<std::string>();
      const std::string kind = item.value("kind", "foreground");
      if (kind == "background") {
        s.kind = SubtaskKind::kBackground;
      } else if (kind != "foreground") {
        invalid("unknown kind '" + kind + "'");
      }
      if (item.contains("attributes")) s.attributes = attributes_from_json(item.at("attributes"));
      if (item.contains("constraints") && !item.at("constraints").is_null()) {
        s.layout = layout_from_json(item.at("constraints"));
      }
      plan.subtasks.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    invalid(e.what());
  }
  validate_plan(plan);
  return plan;
}

double plan_loss(const SubtaskPlan& plan) {
  if (plan.coverage >= 1.0) return 0.0;
  return -std::log(plan.coverage);
}

}  // namespace provgen::planner
