#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/core/clock.hpp"
#include "provgen/core/config.hpp"
#include "provgen/core/prompt.hpp"
#include "provgen/core/session.hpp"
#include "provgen/generator/generator.hpp"
#include "provgen/integrator/scene.hpp"
#include "provgen/orchestrator/intervention.hpp"
#include "provgen/planner/planner.hpp"
#include "provgen/protector/provenance.hpp"
#include "provgen/reviewer/gate.hpp"
#include "provgen/reviewer/scorer.hpp"

namespace provgen::orchestrator {

struct Agents {
  std::shared_ptr<planner::Planner> planner;
  std::shared_ptr<generator::Generator> generator;
  std::shared_ptr<reviewer::Scorer> scorer;
  std::string salt;
  Clock clock;
};

/// Grammar planner, procedural generator and stub scorer.
Agents local_agents(Clock clock = system_clock(), std::string salt = protector::watermark_salt());

/// Local agents, with each role swapped for its HTTP client when
/// PROVGEN_PLANNER_URL, PROVGEN_GENERATOR_URL or PROVGEN_SCORER_URL is set.
Agents agents_from_environment(Clock clock = system_clock());

struct Artifact {
  Image image;  // 8-bit exact
  protector::ProvenanceRecord provenance;
  MetricsReport metrics;
};

/// Per-component seed of a session.
std::uint64_t component_seed(std::uint64_t session_seed, int subtask_id);

/// Chip RMS of the configured watermark on a scene_size square frame.
/// Throws kCapacityExceeded.
double configured_rms(const PipelineConfig& config);

/// One session's state machine. Every observable step is an event; a runner
/// rebuilt from a log re-executes the stages and checks each event it would
/// emit against the logged one, so the log is the single source of truth.
class SessionRunner {
 public:
  using EventObserver = std::function<void(const Event&)>;

  SessionRunner(std::string session_id, const std::string& prompt, PipelineConfig config, Agents agents,
                std::int64_t created_ms);

  /// Rebuilds a runner by replaying `record`. Failed sessions are restored
  /// as read-only records. Throws kReplayDivergence.
  static SessionRunner resume(SessionRecord record, Agents agents);

  /// Called for every newly appended (not replayed) event.
  void set_observer(EventObserver observer) { observer_ = std::move(observer); }

  const SessionRecord& record() const { return record_; }
  SessionState state() const { return state_; }
  const PipelineConfig& config() const { return config_; }

  /// Runs the next stage and pauses; under no_hitl runs to a terminal state.
  /// Throws kIllegalTransition on a terminal session and rethrows stage
  /// failures after logging them.
  void advance();

  /// Validates and applies a human intervention. Throws kIllegalIntervention.
  void submit(const Intervention& intervention);

  const std::optional<planner::SubtaskPlan>& plan() const { return plan_; }
  const std::vector<generator::Component>& components() const { return components_; }
  const generator::Component* component(int subtask_id) const;
  const reviewer::ReviewReport& review() const { return review_; }
  const integrator::Scene* scene() const { return scene_ ? &*scene_ : nullptr; }
  /// Throws kNotReady before Done.
  const Artifact& artifact() const;
  bool has_artifact() const { return artifact_.has_value(); }

  /// State, events and whatever intermediate results exist.
  nlohmann::json snapshot() const;

 private:
  SessionRunner(SessionRecord record, PipelineConfig config, Agents agents);

  Event emit(EventKind kind, nlohmann::json payload);
  Event change_state(SessionState to, nlohmann::json extra = nlohmann::json::object());
  void emit_component(const generator::Component& component);
  bool replaying() const { return cursor_ < record_.events.size(); }
  void replay_all();

  void run_stage_guarded();
  void run_stage();
  void stage_plan();
  void stage_generate();
  void stage_review();
  void stage_rereview();
  void stage_integrate();
  void integrate_scene();
  void stage_protect();

  void apply(const Intervention& intervention);
  generator::GeneratorParams generator_params() const;
  reviewer::GateOptions gate_options() const;
  void gate(std::vector<generator::Component> batch);
  integrator::Layout current_layout() const;

  SessionRecord record_;
  PipelineConfig config_;
  PromptText prompt_;
  Agents agents_;
  EventObserver observer_;

  SessionState state_ = SessionState::kCreated;
  std::size_t cursor_ = 0;
  bool frozen_ = false;

  std::optional<planner::SubtaskPlan> plan_;
  std::vector<generator::Component> components_;  // ascending subtask id
  reviewer::ReviewReport review_;
  std::set<int> overridden_;
  std::map<int, std::string> pending_;  // subtask id -> regeneration reason
  std::vector<AdjustLayout> adjustments_;
  bool layout_dirty_ = false;
  int edit_round_ = 0;
  std::optional<integrator::Scene> scene_;
  std::optional<Artifact> artifact_;
};

}  // namespace provgen::orchestrator
