#include "provgen/planner/grammar.hpp"

#include <algorithm>
#include <set>

#include "provgen/core/error.hpp"
#include "provgen/planner/lexicon.hpp"

namespace provgen::planner {

namespace {

std::vector<std::string> tokenize(const std::string& normalized) {
  static constexpr std::string_view kPunct = ",.;:!?\"'()";
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= normalized.size()) {
    std::size_t end = normalized.find(' ', start);
    if (end == std::string::npos) end = normalized.size();
    std::string tok = normalized.substr(start, end - start);
    while (!tok.empty() && kPunct.find(tok.back()) != std::string_view::npos) tok.pop_back();
    while (!tok.empty() && kPunct.find(tok.front()) != std::string_view::npos) tok.erase(tok.begin());
    if (!tok.empty()) tokens.push_back(std::move(tok));
    start = end + 1;
  }
  return tokens;
}

bool is_article(std::string_view t) { return t == "a" || t == "an" || t == "the"; }

bool is_modifier(std::string_view t) {
  return color_index(t).has_value() || parse_size(t).has_value() || is_style(t);
}

struct RelationMatch {
  Relation relation;
  std::size_t length;
};

std::optional<RelationMatch> match_relation(const std::vector<std::string>& tokens, std::size_t i) {
  const std::string& t = tokens[i];
  if (t == "above") return RelationMatch{Relation::kAbove, 1};
  if (t == "below") return RelationMatch{Relation::kBelow, 1};
  if (t == "over") return RelationMatch{Relation::kOver, 1};
  if (t == "left-of") return RelationMatch{Relation::kLeftOf, 1};
  if (t == "right-of") return RelationMatch{Relation::kRightOf, 1};
  const bool of_next = i + 1 < tokens.size() && tokens[i + 1] == "of";
  if (t == "left" && of_next) return RelationMatch{Relation::kLeftOf, 2};
  if (t == "right" && of_next) return RelationMatch{Relation::kRightOf, 2};
  return std::nullopt;
}

Relation inverse(Relation r) {
  switch (r) {
    case Relation::kAbove: return Relation::kBelow;
    case Relation::kBelow: return Relation::kAbove;
    case Relation::kLeftOf: return Relation::kRightOf;
    case Relation::kRightOf: return Relation::kLeftOf;
    case Relation::kOver: return Relation::kOver;
  }
  return r;
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

PromptAST parse_prompt(const PromptText& prompt) {
  PromptAST ast;
  ast.tokens = tokenize(prompt.normalized);
  const auto& tok = ast.tokens;
  const std::size_t n = tok.size();
  std::vector<bool> consumed(n, false);

  struct PendingPhrase {
    std::vector<std::size_t> positions;
    bool definite = false;
    std::vector<std::string> modifiers;
    std::optional<std::string> pose;
  };
  struct PendingRelation {
    Relation relation;
    std::vector<std::size_t> positions;
    int subject;
  };
  std::optional<PendingPhrase> phrase;
  std::optional<PendingRelation> relation;
  std::optional<std::size_t> conjunction;
  int last = -1;
  bool just_closed = false;

  std::size_t i = 0;
  while (i < n) {
    const std::string& t = tok[i];

    if (t == "at" && i + 1 < n && !ast.background && find_background(tok[i + 1])) {
      ast.background = tok[i + 1];
      consumed[i] = consumed[i + 1] = true;
      phrase.reset();
      just_closed = false;
      i += 2;
      continue;
    }

    if (t == "in" && last >= 0 && just_closed && !phrase) {
      std::size_t j = i + 1;
      if (j < n && tok[j] == "the") ++j;
      if (j < n && parse_cell(tok[j]) && !ast.clauses[last].anchor) {
        ast.clauses[last].anchor = parse_cell(tok[j]);
        for (std::size_t k = i; k <= j; ++k) consumed[k] = true;
        i = j + 1;
        continue;
      }
    }

    if (auto rel = match_relation(tok, i); rel && last >= 0 && !phrase) {
      PendingRelation pending{rel->relation, {}, last};
      for (std::size_t k = 0; k < rel->length; ++k) pending.positions.push_back(i + k);
      relation = std::move(pending);
      conjunction.reset();
      just_closed = false;
      i += rel->length;
      continue;
    }

    if (t == "and" && last >= 0 && !phrase) {
      conjunction = i;
      just_closed = false;
      ++i;
      continue;
    }

    if (is_article(t) || is_modifier(t) || is_pose(t)) {
      if (!phrase) phrase.emplace();
      phrase->positions.push_back(i);
      if (is_article(t)) {
        phrase->definite = t == "the";
      } else if (is_pose(t)) {
        phrase->pose = t;
      } else {
        phrase->modifiers.push_back(t);
      }
      just_closed = false;
      ++i;
      continue;
    }

    if (is_entity(t)) {
      PendingPhrase np = phrase.value_or(PendingPhrase{});
      int index = -1;
      if (np.definite) {
        for (std::size_t c = 0; c < ast.clauses.size(); ++c) {
          if (ast.clauses[c].noun == t) index = static_cast<int>(c);
        }
      }
      if (index < 0) {
        ast.clauses.push_back(EntityClause{t, {}, std::nullopt, std::nullopt});
        index = static_cast<int>(ast.clauses.size()) - 1;
      }
      EntityClause& clause = ast.clauses[index];
      for (const auto& m : np.modifiers) add_unique(clause.modifiers, m);
      if (np.pose && !clause.pose) clause.pose = np.pose;
      for (std::size_t p : np.positions) consumed[p] = true;
      consumed[i] = true;
      if (relation) {
        ast.relations.push_back(RelationClause{relation->subject, relation->relation, index,
                                               relation->positions.size()});
        for (std::size_t p : relation->positions) consumed[p] = true;
        relation.reset();
      }
      if (conjunction) {
        consumed[*conjunction] = true;
        conjunction.reset();
      }
      phrase.reset();
      last = index;
      just_closed = true;
      ++i;
      if (i < n && is_pose(tok[i]) && !clause.pose) {
        clause.pose = tok[i];
        consumed[i] = true;
        ++i;
      }
      continue;
    }

    // Unknown token: abandon any half-built noun phrase.
    phrase.reset();
    just_closed = false;
    ++i;
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (consumed[k]) {
      ++ast.consumed;
    } else {
      ast.unparsed.push_back(tok[k]);
    }
  }
  if (ast.clauses.empty()) {
    throw Error(ErrorCode::kNoEntityFound, "no entity clause found in prompt '" + prompt.normalized + "'");
  }
  return ast;
}

SubtaskPlan decompose(const PromptAST& ast, const PipelineConfig& /*config*/) {
  SubtaskPlan plan;
  plan.source = PlanSource::kGrammar;
  for (std::size_t c = 0; c < ast.clauses.size(); ++c) {
    const EntityClause& clause = ast.clauses[c];
    Subtask s;
    s.id = static_cast<int>(c);
    s.entity = clause.noun;
    s.kind = SubtaskKind::kForeground;
    for (const auto& m : clause.modifiers) {
      if (color_index(m)) {
        s.attributes.color = m;
      } else if (auto size = parse_size(m)) {
        s.attributes.size = size;
      } else {
        add_unique(s.attributes.styles, m);
      }
    }
    s.attributes.pose = clause.pose;
    if (clause.anchor) s.layout = LayoutConstraint{*clause.anchor, 1};
    plan.subtasks.push_back(std::move(s));
  }

  std::size_t dropped = 0;
  for (const auto& rel : ast.relations) {
    if (rel.subject == rel.object) {
      throw Error(ErrorCode::kCyclicLayout, "entity '" + ast.clauses[rel.subject].noun + "' related to itself");
    }
    Subtask& subject = plan.subtasks[rel.subject];
    Subtask& object = plan.subtasks[rel.object];
    if (!subject.layout) {
      subject.layout = LayoutConstraint{RelativePlacement{object.id, rel.relation}, 1};
    } else if (!object.layout && rel.relation != Relation::kOver) {
      object.layout = LayoutConstraint{RelativePlacement{subject.id, inverse(rel.relation)}, 1};
    } else {
      // Each subtask carries one constraint; a relation with no free end is
      // left out and counted as unparsed text.
      dropped += rel.token_count;
    }
  }

  // Reject cycles before propagating depths (propagation assumes a DAG).
  {
    const std::size_t n = plan.subtasks.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t steps = 0;
      const Subtask* cur = &plan.subtasks[i];
      while (cur->layout && std::holds_alternative<RelativePlacement>(cur->layout->position)) {
        const int next = std::get<RelativePlacement>(cur->layout->position).target;
        if (next == plan.subtasks[i].id || ++steps > n) {
          throw Error(ErrorCode::kCyclicLayout,
                      "layout relations form a cycle through '" + plan.subtasks[i].entity + "'");
        }
        cur = plan.find(next);
      }
    }
  }
  for (std::size_t round = 0; round < plan.subtasks.size(); ++round) {
    for (auto& s : plan.subtasks) {
      if (!s.layout) continue;
      if (const auto* rel = std::get_if<RelativePlacement>(&s.layout->position);
          rel && rel->relation == Relation::kOver) {
        s.layout->depth = std::max(s.layout->depth, plan.find(rel->target)->depth() + 1);
      }
    }
  }

  Subtask background;
  background.id = static_cast<int>(plan.subtasks.size());
  background.kind = SubtaskKind::kBackground;
  if (ast.background) {
    const auto phrase = find_background(*ast.background);
    background.entity = std::string(kSkyEntity);
    background.attributes.color = std::string(phrase->color_tag);
    background.attributes.styles = {*ast.background};
  } else {
    background.entity = std::string(kNeutralBackdrop);
    background.attributes.styles = {"neutral"};
  }
  background.attributes.size = SizeClass::kLarge;
  plan.subtasks.push_back(std::move(background));

  const std::size_t total = ast.tokens.size();
  plan.coverage = static_cast<double>(ast.consumed - dropped) / static_cast<double>(total);
  validate_plan(plan);
  return plan;
}

nlohmann::json to_json(const PlanEdit& edit) {
  return std::visit(
      [](const auto& op) -> nlohmann::json {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, PlanEdit::SetAttribute>) {
          return {{"op", "set_attribute"}, {"id", op.id}, {"key", op.key}, {"value", op.value}};
        } else if constexpr (std::is_same_v<T, PlanEdit::SetAnchor>) {
          return {{"op", "set_anchor"},
                  {"id", op.id},
                  {"cell", op.cell ? nlohmann::json(to_string(*op.cell)) : nlohmann::json(nullptr)}};
        } else if constexpr (std::is_same_v<T, PlanEdit::SetRelation>) {
          return {{"op", "set_relation"}, {"id", op.id}, {"relation", to_string(op.relation)}, {"target", op.target}};
        } else if constexpr (std::is_same_v<T, PlanEdit::Remove>) {
          return {{"op", "remove"}, {"id", op.id}};
        } else {
          return {{"op", "add"},
                  {"object", op.entity},
                  {"kind", op.kind == SubtaskKind::kBackground ? "background" : "foreground"},
                  {"attributes", to_json(op.attributes)},
                  {"constraints", op.layout ? to_json(*op.layout) : nlohmann::json(nullptr)}};
        }
      },
      edit.op);
}

PlanEdit plan_edit_from_json(const nlohmann::json& j) {
  auto invalid = [](const std::string& what) -> void { throw Error(ErrorCode::kInvalidPlan, "plan edit: " + what); };
  if (!j.is_object() || !j.contains("op")) invalid("missing op");
  const std::string op = j.at("op").get<std::string>();
  auto check_keys = [&](std::set<std::string> allowed) {
    allowed.insert("op");
    for (const auto& [key, _] : j.items()) {
      if (!allowed.contains(key)) invalid("unknown field '" + key + "'");
    }
  };
  try {
    if (op == "set_attribute") {
      check_keys({"id", "key", "value"});
      return {PlanEdit::SetAttribute{j.at("id").get<int>(), j.at("key").get<std::string>(),
                                     j.at("value").get<std::string>()}};
    }
    if (op == "set_anchor") {
      check_keys({"id", "cell"});
      PlanEdit::SetAnchor e{j.at("id").get<int>(), std::nullopt};
      if (j.contains("cell") && !j.at("cell").is_null()) {
        e.cell = parse_cell(j.at("cell").get<std::string>());
        if (!e.cell) invalid("unknown cell");
      }
      return {e};
    }
    if (op == "set_relation") {
      check_keys({"id", "relation", "target"});
      const auto rel = parse_relation(j.at("relation").get<std::string>());
      if (!rel) invalid("unknown relation");
      return {PlanEdit::SetRelation{j.at("id").get<int>(), *rel, j.at("target").get<int>()}};
    }
    if (op == "remove") {
      check_keys({"id"});
      return {PlanEdit::Remove{j.at("id").get<int>()}};
    }
    if (op == "add") {
      check_keys({"object", "kind", "attributes", "constraints"});
      PlanEdit::Add add;
      add.entity = j.at("object").get<std::string>();
      if (j.value("kind", "foreground") == "background") add.kind = SubtaskKind::kBackground;
      if (j.contains("attributes")) add.attributes = attributes_from_json(j.at("attributes"));
      if (j.contains("constraints") && !j.at("constraints").is_null()) add.layout = layout_from_json(j.at("constraints"));
      return {add};
    }
  } catch (const nlohmann::json::exception& e) {
    invalid(e.what());
  }
  throw Error(ErrorCode::kInvalidPlan, "plan edit: unknown op '" + op + "'");
}

SubtaskPlan apply_plan_edit(const SubtaskPlan& plan, const PlanEdit& edit) {
  SubtaskPlan next = plan;
  auto require_subtask = [&](int id) -> Subtask& {
    Subtask* s = next.find(id);
    if (s == nullptr) throw Error(ErrorCode::kUnknownSubtask, "no subtask with id " + std::to_string(id));
    return *s;
  };
  auto require_foreground = [&](int id) -> Subtask& {
    Subtask& s = require_subtask(id);
    if (s.is_background()) throw Error(ErrorCode::kInvalidPlan, "background subtask has no layout");
    return s;
  };

  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, PlanEdit::SetAttribute>) {
          Subtask& s = require_subtask(op.id);
          if (op.key == "color") {
            if (!op.value.empty() && !color_index(op.value)) {
              throw Error(ErrorCode::kInvalidPlan, "unknown color '" + op.value + "'");
            }
            s.attributes.color = op.value.empty() ? std::nullopt : std::optional(op.value);
          } else if (op.key == "size") {
            if (op.value.empty()) {
              s.attributes.size.reset();
            } else if (auto size = parse_size(op.value)) {
              s.attributes.size = size;
            } else {
              throw Error(ErrorCode::kInvalidPlan, "unknown size '" + op.value + "'");
            }
          } else if (op.key == "pose") {
            if (!op.value.empty() && !is_pose(op.value)) {
              throw Error(ErrorCode::kInvalidPlan, "unknown pose '" + op.value + "'");
            }
            s.attributes.pose = op.value.empty() ? std::nullopt : std::optional(op.value);
          } else if (op.key == "style") {
            if (op.value.empty()) {
              s.attributes.styles.clear();
            } else {
              add_unique(s.attributes.styles, op.value);
            }
          } else {
            throw Error(ErrorCode::kInvalidPlan, "unknown attribute '" + op.key + "'");
          }
        } else if constexpr (std::is_same_v<T, PlanEdit::SetAnchor>) {
          Subtask& s = require_foreground(op.id);
          if (op.cell) {
            s.layout = LayoutConstraint{*op.cell, s.layout ? s.layout->depth : 1};
          } else {
            s.layout.reset();
          }
        } else if constexpr (std::is_same_v<T, PlanEdit::SetRelation>) {
          Subtask& s = require_foreground(op.id);
          const Subtask& target = require_subtask(op.target);
          int depth = s.layout ? s.layout->depth : 1;
          if (op.relation == Relation::kOver) depth = std::max(depth, target.depth() + 1);
          s.layout = LayoutConstraint{RelativePlacement{op.target, op.relation}, depth};
        } else if constexpr (std::is_same_v<T, PlanEdit::Remove>) {
          require_subtask(op.id);
          for (const auto& other : next.subtasks) {
            if (!other.layout) continue;
            if (const auto* rel = std::get_if<RelativePlacement>(&other.layout->position);
                rel && rel->target == op.id) {
              throw Error(ErrorCode::kInvalidPlan, "subtask " + std::to_string(op.id) +
                                                       " is still referenced by subtask " +
                                                       std::to_string(other.id));
            }
          }
          std::erase_if(next.subtasks, [&](const Subtask& s) { return s.id == op.id; });
        } else {
          int max_id = -1;
          for (const auto& s : next.subtasks) max_id = std::max(max_id, s.id);
          Subtask s;
          s.id = max_id + 1;
          s.entity = op.entity;
          s.kind = op.kind;
          s.attributes = op.attributes;
          s.layout = op.layout;
          next.subtasks.push_back(std::move(s));
        }
      },
      edit.op);

  validate_plan(next);
  return next;
}

std::vector<int> edited_subtasks(const SubtaskPlan& before, const SubtaskPlan& after) {
  std::vector<int> ids;
  for (const auto& s : after.subtasks) {
    const Subtask* old = before.find(s.id);
    if (old == nullptr || old->entity != s.entity || old->attributes != s.attributes || old->kind != s.kind) {
      ids.push_back(s.id);
    }
  }
  return ids;
}

}  // namespace provgen::planner
