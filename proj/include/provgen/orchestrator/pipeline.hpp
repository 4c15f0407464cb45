#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "provgen/core/rng.hpp"
#include "provgen/orchestrator/runner.hpp"

namespace provgen::orchestrator {

/// Interventions submitted when the session pauses in the given state.
using InterventionScript = std::vector<std::pair<SessionState, Intervention>>;

/// Runs a session to a terminal state, submitting the scripted interventions
/// at each pause. Throws whatever a failing stage throws.
SessionRunner run_pipeline(const std::string& prompt, const PipelineConfig& config, const Agents& agents,
                           const InterventionScript& script = {}, const std::string& session_id = "local",
                           std::int64_t created_ms = 0);

/// Prompt drawn from the planner grammar that the grammar planner accepts:
/// one to three entity clauses, relations or anchors, optional time of day.
std::string random_prompt(Rng& rng);

/// Scene after integration, before protection.
Image render_scene(const std::string& prompt, const PipelineConfig& config, const Agents& agents);

/// `n` integrated scenes from random prompts; config seeds follow `seed`.
std::vector<Image> procedural_corpus(int n, std::uint64_t seed, const PipelineConfig& config = {});

}  // namespace provgen::orchestrator
