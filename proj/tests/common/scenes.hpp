#pragma once

#include <string>
#include <vector>

#include "provgen/core/rng.hpp"
#include "provgen/generator/generator.hpp"
#include "provgen/integrator/layout.hpp"
#include "provgen/integrator/scene.hpp"
#include "provgen/orchestrator/pipeline.hpp"
#include "provgen/planner/grammar.hpp"

namespace testing_support {

// Composited scene of a random grammar prompt.
inline provgen::integrator::Scene random_scene(provgen::Rng& rng, int scene_size, int resolution) {
  using namespace provgen;
  using namespace provgen::integrator;
  const std::string prompt = orchestrator::random_prompt(rng);
  const auto plan = planner::decompose(planner::parse_prompt(PromptText::from(prompt)), {});
  const Layout layout = resolve_layout(plan, scene_size);
  generator::ProceduralGenerator gen;
  generator::GeneratorParams params;
  params.resolution = resolution;
  std::vector<generator::Component> comps;
  for (const auto& s : plan.subtasks) comps.push_back(gen.generate(s, rng.next(), params));
  return composite(comps, layout, scene_size);
}

}  // namespace testing_support
