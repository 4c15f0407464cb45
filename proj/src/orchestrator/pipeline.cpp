#include "provgen/orchestrator/pipeline.hpp"

#include <array>

#include "provgen/core/error.hpp"
#include "provgen/planner/lexicon.hpp"

namespace provgen::orchestrator {

SessionRunner run_pipeline(const std::string& prompt, const PipelineConfig& config, const Agents& agents,
                           const InterventionScript& script, const std::string& session_id,
                           std::int64_t created_ms) {
  SessionRunner runner(session_id, prompt, config, agents, created_ms);
  while (!is_terminal(runner.state())) {
    for (const auto& [state, iv] : script) {
      if (state == runner.state() && !is_terminal(runner.state())) runner.submit(iv);
    }
    if (is_terminal(runner.state())) break;
    runner.advance();
  }
  return runner;
}

namespace {

constexpr std::array<std::string_view, 5> kRelations{"above", "below", "left of", "right of", "over"};
constexpr std::array<std::string_view, 9> kCells{"upper-left", "upper-center", "upper-right",
                                                 "middle-left", "center", "middle-right",
                                                 "lower-left", "lower-center", "lower-right"};

template <class Seq>
std::string pick(Rng& rng, const Seq& seq) {
  return std::string(seq[rng.below(seq.size())]);
}

std::string entity_clause(Rng& rng) {
  std::string s = "a ";
  if (rng.uniform() < 0.3) s += pick(rng, planner::size_words()) + " ";
  if (rng.uniform() < 0.7) s += std::string(planner::color_terms()[rng.below(planner::color_terms().size())].name) + " ";
  s += pick(rng, planner::entity_nouns());
  if (rng.uniform() < 0.2) s += " " + pick(rng, planner::pose_words());
  return s;
}

std::string draw(Rng& rng) {
  const int clauses = 1 + static_cast<int>(rng.below(3));
  std::string prompt = entity_clause(rng);
  for (int i = 1; i < clauses; ++i) {
    if (rng.uniform() < 0.7) {
      prompt += " " + pick(rng, kRelations) + " " + entity_clause(rng);
    } else {
      prompt += " and " + entity_clause(rng);
      if (rng.uniform() < 0.5) prompt += " in the " + pick(rng, kCells);
    }
  }
  if (rng.uniform() < 0.6) {
    const auto phrases = planner::background_phrases();
    prompt += " at " + std::string(phrases[rng.below(phrases.size())].word);
  }
  return prompt;
}

}  // namespace

std::string random_prompt(Rng& rng) {
  planner::GrammarPlanner planner;
  for (;;) {
    std::string prompt = draw(rng);
    try {
      planner.plan(PromptText::from(prompt), PipelineConfig{});
      return prompt;
    } catch (const Error&) {
      // contradictory layout; draw again
    }
  }
}

Image render_scene(const std::string& prompt, const PipelineConfig& config, const Agents& agents) {
  PipelineConfig c = config;
  c.ablations.no_hitl = false;
  SessionRunner runner("corpus", prompt, c, agents, 0);
  while (runner.state() != SessionState::kIntegrating) runner.advance();
  return runner.scene()->image;
}

std::vector<Image> procedural_corpus(int n, std::uint64_t seed, const PipelineConfig& config) {
  Rng rng(seed);
  const Agents agents = local_agents(fixed_clock(0), "corpus");
  std::vector<Image> corpus;
  corpus.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    PipelineConfig c = config;
    c.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    corpus.push_back(render_scene(random_prompt(rng), c, agents));
  }
  return corpus;
}

}  // namespace provgen::orchestrator
