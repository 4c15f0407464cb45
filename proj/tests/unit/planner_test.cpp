#include <cmath>
#include <set>
#include <sstream>

#include "provgen/planner/grammar.hpp"
#include "provgen/planner/grid.hpp"
#include "provgen/planner/lexicon.hpp"
#include "provgen/planner/planner.hpp"
#include "support.hpp"

using namespace provgen;
using namespace provgen::planner;

namespace {

SubtaskPlan plan_of(const std::string& prompt) { return GrammarPlanner().plan(PromptText::from(prompt), {}); }

const char* kDragon = "a red dragon flying above a medieval castle at sunset";

}  // namespace

TEST(Grammar, DragonCastleSunset) {
  const PromptAST ast = parse_prompt(PromptText::from(kDragon));
  ASSERT_EQ(ast.clauses.size(), 2u);
  EXPECT_EQ(ast.clauses[0].noun, "dragon");
  EXPECT_EQ(ast.clauses[0].modifiers, std::vector<std::string>{"red"});
  EXPECT_EQ(ast.clauses[0].pose, "flying");
  EXPECT_EQ(ast.clauses[1].noun, "castle");
  EXPECT_EQ(ast.clauses[1].modifiers, std::vector<std::string>{"medieval"});
  ASSERT_EQ(ast.relations.size(), 1u);
  EXPECT_EQ(ast.relations[0].relation, Relation::kAbove);
  EXPECT_EQ(ast.relations[0].subject, 0);
  EXPECT_EQ(ast.relations[0].object, 1);
  EXPECT_EQ(ast.background, "sunset");
  EXPECT_TRUE(ast.unparsed.empty());
}

TEST(Grammar, MinimalAndDegenerate) {
  const PromptAST ast = parse_prompt(PromptText::from("blue circle"));
  ASSERT_EQ(ast.clauses.size(), 1u);
  EXPECT_TRUE(ast.relations.empty());
  EXPECT_FALSE(ast.background.has_value());
  EXPECT_CODE(parse_prompt(PromptText::from("sunset at the the")), ErrorCode::kNoEntityFound);
}

TEST(Grammar, DefiniteArticleRefersBack) {
  const PromptAST ast = parse_prompt(PromptText::from("a tree and a bird above the tree"));
  EXPECT_EQ(ast.clauses.size(), 2u);
  ASSERT_EQ(ast.relations.size(), 1u);
  EXPECT_EQ(ast.relations[0].object, 0);
}

TEST(Decompose, DragonFixture) {
  const SubtaskPlan p = plan_of(kDragon);
  ASSERT_EQ(p.subtasks.size(), 3u);
  EXPECT_EQ(p.subtasks[0].entity, "dragon");
  EXPECT_EQ(p.subtasks[1].entity, "castle");
  EXPECT_EQ(p.subtasks[2].entity, "sky");
  EXPECT_TRUE(p.subtasks[2].is_background());
  EXPECT_EQ(p.foreground_count(), 2u);
  EXPECT_EQ(p.subtasks[0].attributes.color, "red");
  const auto grid = resolve_grid(p);
  EXPECT_LT(grid.at(0).row, grid.at(1).row);
  EXPECT_EQ(p.source, PlanSource::kGrammar);
}

TEST(Decompose, SingleEntityGetsDefaultBackground) {
  const SubtaskPlan p = plan_of("blue circle");
  ASSERT_EQ(p.subtasks.size(), 2u);
  EXPECT_TRUE(p.subtasks[1].is_background());
  EXPECT_EQ(p.subtasks[1].entity, kNeutralBackdrop);
}

TEST(Decompose, CyclesAreRejected) {
  EXPECT_CODE(plan_of("a dragon left of a tree and the tree left of the dragon"), ErrorCode::kCyclicLayout);
}

TEST(Decompose, Deterministic) {
  EXPECT_EQ(plan_of(kDragon), plan_of(kDragon));
}

namespace {

// Independent coverage oracle: a token counts as consumed when it belongs to
// the grammar's closed vocabulary.
double vocabulary_coverage(const std::string& prompt) {
  std::set<std::string> vocab{"a", "an", "the", "and", "at", "in", "above", "below", "over", "left", "right", "of"};
  for (auto w : entity_nouns()) vocab.insert(std::string(w));
  for (auto w : size_words()) vocab.insert(std::string(w));
  for (auto w : pose_words()) vocab.insert(std::string(w));
  for (auto w : style_words()) vocab.insert(std::string(w));
  for (const auto& c : color_terms()) vocab.insert(std::string(c.name));
  for (const auto& b : background_phrases()) vocab.insert(std::string(b.word));
  std::istringstream in(PromptText::from(prompt).normalized);
  std::string t;
  int total = 0, known = 0;
  while (in >> t) {
    ++total;
    known += vocab.count(t) ? 1 : 0;
  }
  return static_cast<double>(known) / total;
}

}  // namespace

TEST(PlanLoss, Fixtures) {
  SubtaskPlan p = plan_of("blue circle");
  EXPECT_EQ(plan_loss(p), 0.0);
  p.coverage = 0.5;
  EXPECT_NEAR(plan_loss(p), 0.6931, 1e-4);
  const std::string junk = std::string(kDragon) + " please render quickly";
  const SubtaskPlan q = plan_of(junk);
  EXPECT_NEAR(q.coverage, vocabulary_coverage(junk), 1e-12);
  EXPECT_NEAR(q.coverage, 10.0 / 13.0, 1e-12);
  EXPECT_NEAR(plan_loss(q), -std::log(10.0 / 13.0), 1e-12);
}

TEST(PlanLoss, JunkNeverDecreasesLoss) {
  Rng rng(4);
  const std::vector<std::string> junk{"please", "quickly", "very", "beautiful", "render", "with", "lots", "detail"};
  std::string prompt = kDragon;
  double prev = plan_loss(plan_of(prompt));
  for (int i = 0; i < 30; ++i) {
    prompt += " " + junk[rng.below(junk.size())];
    const double now = plan_loss(plan_of(prompt));
    EXPECT_GE(now, prev);
    prev = now;
  }
}

TEST(PlanJson, RoundTripAndStrictness) {
  for (const char* prompt : {kDragon, "a small sun in the upper-left and a boat", "a bird over a large tree at night"}) {
    const SubtaskPlan p = plan_of(prompt);
    EXPECT_EQ(plan_from_json(to_json(p)), p);
  }
  nlohmann::json j = to_json(plan_of(kDragon));
  j["subtasks"][0]["mood"] = "angry";
  EXPECT_CODE(plan_from_json(j), ErrorCode::kInvalidPlan);
  j = to_json(plan_of(kDragon));
  j["coverage"] = 0.0;
  EXPECT_CODE(plan_from_json(j), ErrorCode::kInvalidPlan);
}

TEST(PlanValidation, Invariants) {
  SubtaskPlan p = plan_of(kDragon);
  SubtaskPlan dup = p;
  dup.subtasks[1].id = 0;
  EXPECT_CODE(validate_plan(dup), ErrorCode::kInvalidPlan);
  SubtaskPlan two_bg = p;
  two_bg.subtasks.push_back(p.subtasks[2]);
  two_bg.subtasks.back().id = 9;
  EXPECT_CODE(validate_plan(two_bg), ErrorCode::kInvalidPlan);
  SubtaskPlan dangling = p;
  std::get<RelativePlacement>(dangling.subtasks[0].layout->position).target = 42;
  EXPECT_CODE(validate_plan(dangling), ErrorCode::kInvalidPlan);
  SubtaskPlan empty_entity = p;
  empty_entity.subtasks[0].entity.clear();
  EXPECT_CODE(validate_plan(empty_entity), ErrorCode::kInvalidPlan);
}

TEST(PlanEdits, Locality) {
  const SubtaskPlan p = plan_of(kDragon);
  const SubtaskPlan q = apply_plan_edit(p, PlanEdit{PlanEdit::SetAttribute{0, "color", "green"}});
  EXPECT_EQ(q.subtasks[0].attributes.color, "green");
  SubtaskPlan restored = q;
  restored.subtasks[0].attributes.color = "red";
  EXPECT_EQ(restored, p);
  EXPECT_EQ(edited_subtasks(p, q), std::vector<int>{0});
  EXPECT_EQ(q.source, p.source);
}

TEST(PlanEdits, RemoveAddAndErrors) {
  const SubtaskPlan single = plan_of("blue circle");
  EXPECT_CODE(apply_plan_edit(single, PlanEdit{PlanEdit::Remove{0}}), ErrorCode::kInvalidPlan);
  EXPECT_CODE(apply_plan_edit(single, PlanEdit{PlanEdit::SetAttribute{7, "color", "red"}}), ErrorCode::kUnknownSubtask);
  EXPECT_CODE(apply_plan_edit(single, PlanEdit{PlanEdit::SetAttribute{0, "color", "plaid"}}), ErrorCode::kInvalidPlan);

  PlanEdit::Add moon;
  moon.entity = "moon";
  moon.layout = LayoutConstraint{GridCell::kUpperLeft, 1};
  const SubtaskPlan more = apply_plan_edit(single, PlanEdit{moon});
  EXPECT_EQ(more.subtasks.size(), single.subtasks.size() + 1);
  const auto added = edited_subtasks(single, more);
  ASSERT_EQ(added.size(), 1u);
  EXPECT_EQ(more.find(added[0])->entity, "moon");

  const SubtaskPlan p = plan_of("a dragon left of a tree");
  EXPECT_CODE(apply_plan_edit(p, PlanEdit{PlanEdit::SetRelation{1, Relation::kLeftOf, 0}}), ErrorCode::kCyclicLayout);
}

TEST(PlanEdits, JsonRoundTrip) {
  const std::vector<PlanEdit> edits{PlanEdit{PlanEdit::SetAttribute{0, "size", "small"}},
                                    PlanEdit{PlanEdit::SetAnchor{1, GridCell::kLowerRight}},
                                    PlanEdit{PlanEdit::SetAnchor{1, std::nullopt}},
                                    PlanEdit{PlanEdit::SetRelation{0, Relation::kOver, 1}}, PlanEdit{PlanEdit::Remove{3}}};
  for (const auto& e : edits) EXPECT_EQ(to_json(plan_edit_from_json(to_json(e))), to_json(e));
  EXPECT_CODE(plan_edit_from_json({{"op", "explode"}}), ErrorCode::kInvalidPlan);
  EXPECT_CODE(plan_edit_from_json({{"op", "remove"}, {"id", 1}, {"extra", 2}}), ErrorCode::kInvalidPlan);
}

TEST(Grid, RelationsHonoredOnRandomPlans) {
  // Property: every compiled relation holds in the resolved grid.
  const std::vector<std::string> nouns{"dragon", "castle", "tree", "bird", "boat", "sun"};
  const std::vector<std::string> rels{"above", "below", "left of", "right of", "over"};
  Rng rng(12);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::string prompt = "a " + nouns[rng.below(nouns.size())];
    const int n = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < n; ++i) prompt += " " + rels[rng.below(rels.size())] + " a " + nouns[rng.below(nouns.size())];
    SubtaskPlan p;
    try {
      p = plan_of(prompt);
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kUnsatisfiableLayout || e.code() == ErrorCode::kCyclicLayout) << prompt;
      continue;
    }
    const auto grid = resolve_grid(p);
    for (const auto& s : p.subtasks) {
      if (!s.layout) continue;
      const auto* rel = std::get_if<RelativePlacement>(&s.layout->position);
      if (!rel) continue;
      const GridSlot a = grid.at(s.id), b = grid.at(rel->target);
      switch (rel->relation) {
        case Relation::kAbove: EXPECT_LT(a.row, b.row) << prompt; break;
        case Relation::kBelow: EXPECT_GT(a.row, b.row) << prompt; break;
        case Relation::kLeftOf: EXPECT_LT(a.col, b.col) << prompt; break;
        case Relation::kRightOf: EXPECT_GT(a.col, b.col) << prompt; break;
        case Relation::kOver:
          EXPECT_EQ(a.row, b.row) << prompt;
          EXPECT_EQ(a.col, b.col) << prompt;
          EXPECT_GT(a.depth, b.depth) << prompt;
          break;
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(Grid, AnchorsAndCollisions) {
  const auto g = resolve_grid(plan_of("a small sun in the upper-left and a boat"));
  EXPECT_EQ(g.at(0).row, 0);
  EXPECT_EQ(g.at(0).col, 0);
  const auto h = resolve_grid(plan_of("a red dragon above a blue circle and a green tree left of the circle"));
  std::set<std::pair<int, int>> cells;
  for (const auto& [id, slot] : h) cells.insert({slot.row, slot.col});
  EXPECT_EQ(cells.size(), h.size());
}

TEST(ExternalPlanner, ValidatesResponses) {
  const nlohmann::json good = to_json(plan_of(kDragon));
  testing_support::LocalServer server([&](httplib::Server& s) {
    s.Post("/good/plan", [&](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      EXPECT_EQ(body.at("template_id"), "fewshot-v1");
      res.set_content(good.dump(), "application/json");
    });
    s.Post("/bad/plan", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"subtasks": "nope"})", "application/json");
    });
    s.Post("/down/plan", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  });
  ExternalPlanner ok(server.url() + "/good");
  const SubtaskPlan p = ok.plan(PromptText::from(kDragon), {});
  EXPECT_EQ(p.source, PlanSource::kExternal);
  EXPECT_EQ(p.subtasks, plan_of(kDragon).subtasks);
  ExternalPlanner bad(server.url() + "/bad");
  EXPECT_CODE(bad.plan(PromptText::from(kDragon), {}), ErrorCode::kInvalidPlan);
  ExternalPlanner down(server.url() + "/down");
  EXPECT_CODE(down.plan(PromptText::from(kDragon), {}), ErrorCode::kPlannerUnavailable);
}
