#include "provgen/orchestrator/runner.hpp"

#include <algorithm>
#include <cstdlib>

#include "provgen/attack/bench.hpp"
#include "provgen/attack/jpeg.hpp"
#include "provgen/core/digest.hpp"
#include "provgen/core/error.hpp"
#include "provgen/core/rng.hpp"
#include "provgen/planner/grammar.hpp"

namespace provgen::orchestrator {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void illegal(const std::string& message) { throw Error(ErrorCode::kIllegalIntervention, message); }

std::string hex_digest(const Image& image) {
  const Digest d = content_hash(image);
  return to_hex(d);
}

constexpr const char* kRejected = "rejected";
constexpr const char* kPlanEdit = "plan-edit";

}  // namespace

Agents local_agents(Clock clock, std::string salt) {
  return Agents{std::make_shared<planner::GrammarPlanner>(), std::make_shared<generator::ProceduralGenerator>(),
                std::make_shared<reviewer::StubScorer>(), std::move(salt), std::move(clock)};
}

Agents agents_from_environment(Clock clock) {
  Agents agents = local_agents(std::move(clock));
  if (const char* url = std::getenv("PROVGEN_PLANNER_URL"); url && *url) {
    agents.planner = std::make_shared<planner::ExternalPlanner>(url);
  }
  if (const char* url = std::getenv("PROVGEN_GENERATOR_URL"); url && *url) {
    const char* model = std::getenv("PROVGEN_GENERATOR_MODEL");
    agents.generator = std::make_shared<generator::ExternalGenerator>(url, model && *model ? model : "external");
  }
  if (const char* url = std::getenv("PROVGEN_SCORER_URL"); url && *url) {
    agents.scorer = std::make_shared<reviewer::ExternalScorer>(url);
  }
  return agents;
}

std::uint64_t component_seed(std::uint64_t session_seed, int subtask_id) {
  return mix_seed(session_seed, static_cast<std::uint64_t>(subtask_id));
}

double configured_rms(const PipelineConfig& config) {
  const protector::WatermarkParams params{config.chips_per_bit, config.amplitude};
  const auto key = protector::derive_key(Digest{}, 0, "", params, config.scene_size, config.scene_size);
  return protector::rms_perturbation(key);
}

SessionRunner::SessionRunner(std::string session_id, const std::string& prompt, PipelineConfig config,
                             Agents agents, std::int64_t created_ms)
    : config_(config), prompt_(PromptText::from(prompt)), agents_(std::move(agents)) {
  config.validate();
  double rms = 0;
  try {
    rms = configured_rms(config);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  }
  if (rms > config.lambda) {
    throw Error(ErrorCode::kInvalidArgument, "watermark rms " + std::to_string(rms) + " exceeds lambda " +
                                                 std::to_string(config.lambda));
  }
  record_.session_id = std::move(session_id);
  record_.prompt = prompt;
  record_.config = config;
  record_.created_ms = created_ms;
}

SessionRunner::SessionRunner(SessionRecord record, PipelineConfig config, Agents agents)
    : record_(std::move(record)), config_(config), prompt_(PromptText::from(record_.prompt)),
      agents_(std::move(agents)) {}

SessionRunner SessionRunner::resume(SessionRecord record, Agents agents) {
  PipelineConfig config = record.config;
  SessionRunner runner(std::move(record), config, std::move(agents));
  if (runner.record_.state == SessionState::kFailed) {
    runner.frozen_ = true;
    runner.state_ = SessionState::kFailed;
    runner.cursor_ = runner.record_.events.size();
    return runner;
  }
  runner.replay_all();
  return runner;
}

void SessionRunner::replay_all() {
  while (replaying()) {
    const Event& next = record_.events[cursor_];
    try {
      if (next.kind == EventKind::kInterventionApplied) {
        apply(intervention_from_json(next.payload.at("intervention")));
        continue;
      }
      if (is_terminal(state_)) throw Error(ErrorCode::kReplayDivergence, "events logged after a terminal state");
      run_stage();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kReplayDivergence) throw;
      throw Error(ErrorCode::kReplayDivergence,
                  "replay of session " + record_.session_id + " failed: " + std::string(e.what()));
    }
  }
}

Event SessionRunner::emit(EventKind kind, nlohmann::json payload) {
  if (replaying()) {
    const Event& logged = record_.events[cursor_];
    if (logged.kind != kind || logged.payload != payload) {
      throw Error(ErrorCode::kReplayDivergence,
                  "event " + std::to_string(logged.seq) + " logged as " + std::string(to_string(logged.kind)) +
                      " " + logged.payload.dump() + ", replay produced " + std::string(to_string(kind)) + " " +
                      payload.dump());
    }
    state_ = next_state(state_, logged);
    ++cursor_;
    return logged;
  }
  Event e;
  e.timestamp_ms = agents_.clock();
  e.kind = kind;
  e.payload = std::move(payload);
  apply_event(record_, std::move(e));
  state_ = record_.state;
  cursor_ = record_.events.size();
  if (observer_) observer_(record_.events.back());
  return record_.events.back();
}

Event SessionRunner::change_state(SessionState to, nlohmann::json extra) {
  extra["from"] = to_string(state_);
  extra["to"] = to_string(to);
  return emit(EventKind::kStateChanged, std::move(extra));
}

void SessionRunner::emit_component(const generator::Component& c) {
  emit(EventKind::kComponentGenerated, {{"subtask_id", c.subtask_id},
                                        {"attempt", c.attempt},
                                        {"seed", c.seed_used},
                                        {"digest", hex_digest(c.image)},
                                        {"glyph", c.glyph}});
}

void SessionRunner::advance() {
  if (frozen_ || is_terminal(state_)) {
    throw Error(ErrorCode::kIllegalTransition,
                "session " + record_.session_id + " is " + std::string(to_string(state_)));
  }
  do {
    run_stage_guarded();
  } while (config_.ablations.no_hitl && !is_terminal(state_));
}

void SessionRunner::run_stage_guarded() {
  try {
    run_stage();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kReplayDivergence || is_terminal(state_)) throw;
    emit(EventKind::kError, {{"code", to_string(e.code())}, {"message", e.what()}});
    change_state(SessionState::kFailed, {{"reason", to_string(e.code())}});
    throw;
  }
}

void SessionRunner::run_stage() {
  switch (state_) {
    case SessionState::kCreated: return stage_plan();
    case SessionState::kPlanned: return stage_generate();
    case SessionState::kGenerating: return stage_review();
    case SessionState::kReviewing: return pending_.empty() ? stage_integrate() : stage_rereview();
    case SessionState::kIntegrating: return layout_dirty_ ? integrate_scene() : stage_protect();
    default:
      throw Error(ErrorCode::kIllegalTransition, "no stage runs from " + std::string(to_string(state_)));
  }
}

void SessionRunner::stage_plan() {
  planner::SubtaskPlan plan;
  if (replaying() && record_.events[cursor_].kind == EventKind::kPlanProduced) {
    // External planners need not be deterministic; the logged plan is authoritative.
    plan = planner::plan_from_json(record_.events[cursor_].payload.at("plan"));
  } else {
    plan = agents_.planner->plan(prompt_, config_);
  }
  planner::validate_plan(plan);
  emit(EventKind::kPlanProduced, {{"plan", planner::to_json(plan)}, {"l_plan", planner::plan_loss(plan)}});
  plan_ = std::move(plan);
}

generator::GeneratorParams SessionRunner::generator_params() const {
  generator::GeneratorParams params;
  params.resolution = config_.component_resolution;
  return params;
}

reviewer::GateOptions SessionRunner::gate_options() const {
  reviewer::GateOptions options;
  options.tau = config_.tau;
  options.max_retries = config_.max_retries;
  options.policy = ReviewPolicy::kAcceptBest;
  options.no_reviewer = config_.ablations.no_reviewer;
  options.overridden = overridden_;
  return options;
}

void SessionRunner::stage_generate() {
  change_state(SessionState::kGenerating);
  std::vector<planner::Subtask> subtasks = plan_->subtasks;
  std::sort(subtasks.begin(), subtasks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const auto params = generator_params();
  components_.clear();
  for (const auto& s : subtasks) {
    generator::Component c = agents_.generator->generate(s, component_seed(config_.seed, s.id), params);
    c.subtask_id = s.id;
    emit_component(c);
    components_.push_back(std::move(c));
  }
}

void SessionRunner::stage_review() {
  change_state(SessionState::kReviewing);
  gate(components_);
}

void SessionRunner::gate(std::vector<generator::Component> batch) {
  const auto options = gate_options();
  const auto params = generator_params();
  auto score = [&](const generator::Component& c) {
    return agents_.scorer->score(c, prompt_, *plan_->find(c.subtask_id));
  };
  auto regen = [&](const generator::Component& c) {
    generator::Component next =
        generator::regenerate(*agents_.generator, c, *plan_->find(c.subtask_id), params, config_.max_retries);
    next.subtask_id = c.subtask_id;
    emit_component(next);
    change_state(SessionState::kReviewing);
    return next;
  };
  auto sink = [&](EventKind kind, nlohmann::json payload) { emit(kind, std::move(payload)); };

  const reviewer::ReviewReport report = reviewer::review_gate(batch, options, score, regen, sink);

  for (auto& c : batch) {
    auto it = std::find_if(components_.begin(), components_.end(),
                           [&](const auto& x) { return x.subtask_id == c.subtask_id; });
    if (it != components_.end()) {
      *it = std::move(c);
    } else {
      components_.push_back(std::move(c));
    }
  }
  std::sort(components_.begin(), components_.end(),
            [](const auto& a, const auto& b) { return a.subtask_id < b.subtask_id; });

  for (reviewer::ReviewEntry entry : report.entries) {
    const bool gated = !options.no_reviewer && !overridden_.count(entry.subtask_id);
    // The gate runs permissively so a human can still override; strict
    // failures are raised when integration is requested.
    if (config_.review_policy == ReviewPolicy::kStrict) entry.passed = !gated || entry.final_score >= options.tau;
    if (reviewer::ReviewEntry* old = review_.find(entry.subtask_id)) {
      *old = std::move(entry);
    } else {
      review_.entries.push_back(std::move(entry));
    }
  }
  std::sort(review_.entries.begin(), review_.entries.end(),
            [](const auto& a, const auto& b) { return a.subtask_id < b.subtask_id; });
  std::vector<double> finals;
  for (const auto& e : review_.entries) finals.push_back(e.final_score);
  review_.l_rev = reviewer::review_loss(finals, config_.tau);
  review_.overridden = overridden_;
}

void SessionRunner::stage_rereview() {
  const auto params = generator_params();
  std::vector<generator::Component> batch;
  for (const auto& [id, reason] : pending_) {
    const planner::Subtask& subtask = *plan_->find(id);
    const generator::Component* current = component(id);
    generator::Component next;
    if (reason == kRejected && current != nullptr) {
      emit(EventKind::kRegenerationTriggered, {{"subtask_id", id},
                                               {"attempt", current->attempt + 1},
                                               {"seed_prev", current->seed_used},
                                               {"reason", reason}});
      next = generator::regenerate(*agents_.generator, *current, subtask, params, config_.max_retries);
    } else {
      const std::uint64_t seed =
          mix_seed(component_seed(config_.seed, id), static_cast<std::uint64_t>(edit_round_));
      emit(EventKind::kRegenerationTriggered, {{"subtask_id", id}, {"attempt", 0}, {"reason", reason}});
      next = agents_.generator->generate(subtask, seed, params);
    }
    next.subtask_id = id;
    emit_component(next);
    change_state(SessionState::kReviewing);
    batch.push_back(std::move(next));
  }
  pending_.clear();
  gate(std::move(batch));
}

void SessionRunner::stage_integrate() {
  for (const auto& e : review_.entries) {
    if (!e.passed && !overridden_.count(e.subtask_id)) {
      throw Error(ErrorCode::kSessionFailure, "subtask " + std::to_string(e.subtask_id) +
                                                  " stayed below tau after " + std::to_string(e.attempts) +
                                                  " attempts");
    }
  }
  change_state(SessionState::kIntegrating);
  integrate_scene();
}

integrator::Layout SessionRunner::current_layout() const {
  integrator::Layout layout = integrator::resolve_layout(*plan_, config_.scene_size);
  for (const auto& a : adjustments_) {
    const integrator::Placement* p = layout.find(a.subtask_id);
    if (p == nullptr || p->background) continue;  // removed by a later edit
    integrator::adjust_placement(layout, a.subtask_id, a.dx, a.dy, a.depth);
  }
  return layout;
}

void SessionRunner::integrate_scene() {
  const integrator::Layout layout = current_layout();
  integrator::Scene scene = integrator::composite(components_, layout, config_.scene_size);
  emit(EventKind::kSceneIntegrated, {{"stage", integrator::to_string(scene.stage)},
                                     {"digest", hex_digest(scene.image)},
                                     {"l_int", integrator::coherence_loss(scene)}});
  if (!config_.ablations.no_integration) {
    double strength = 0;
    integrator::Scene harmonized = integrator::harmonize(scene, &strength);
    emit(EventKind::kSceneIntegrated, {{"stage", integrator::to_string(harmonized.stage)},
                                       {"digest", hex_digest(harmonized.image)},
                                       {"l_int", integrator::coherence_loss(harmonized)},
                                       {"strength", strength}});
    integrator::BlendStats stats;
    scene = integrator::blend_seams(harmonized, &stats);
    emit(EventKind::kSceneIntegrated, {{"stage", integrator::to_string(scene.stage)},
                                       {"digest", hex_digest(scene.image)},
                                       {"l_int", integrator::coherence_loss(scene)},
                                       {"iterations", stats.iterations},
                                       {"residual", stats.residual},
                                       {"band_pixels", stats.band_pixels}});
  }
  scene_ = std::move(scene);
  layout_dirty_ = false;
}

void SessionRunner::stage_protect() {
  const std::int64_t ts = change_state(SessionState::kProtecting).timestamp_ms;
  const bool posthoc = config_.ablations.posthoc_protection;
  const Image& scene = scene_->image;
  const Image host = posthoc ? attack::jpeg_roundtrip(scene, attack::kPosthocExportQuality) : scene;
  const Digest pre = content_hash(host);
  const protector::WatermarkParams params{config_.chips_per_bit, config_.amplitude};
  const auto key = protector::derive_key(pre, ts, agents_.salt, params, host.width(), host.height());
  if (protector::rms_perturbation(key) > config_.lambda) {
    throw Error(ErrorCode::kInvalidArgument, "watermark exceeds the perturbation budget");
  }
  Image marked = attack::export_8bit(protector::embed(host, key));
  const Digest post = content_hash(marked);

  const double penalty =
      config_.quick_suite ? attack::recoverability_penalty(marked, key, attack::quick_suite(config_.seed)) : 0.0;
  const double l_prot = protector::protection_loss(scene, marked, penalty, config_.alpha);

  protector::ProvenanceRecord provenance = protector::make_provenance(key, record_.session_id, ts, pre, post);
  provenance.planner_model = config_.planner_model;
  provenance.generator_model = agents_.generator->model();
  provenance.user_hash = config_.user_hash;
  provenance.mode = posthoc ? "posthoc" : "integrated";
  provenance.config = to_json(config_);

  emit(EventKind::kWatermarkEmbedded, {{"digest_pre", to_hex(pre)},
                                       {"digest_post", to_hex(post)},
                                       {"amplitude", key.amplitude},
                                       {"chips_per_bit", key.chips_per_bit},
                                       {"mode", provenance.mode},
                                       {"recoverability_penalty", penalty}});

  const MetricsReport metrics = MetricsReport::make(planner::plan_loss(*plan_), review_.l_rev,
                                                    integrator::coherence_loss(*scene_), l_prot);
  change_state(SessionState::kDone, {{"metrics", to_json(metrics)}});
  artifact_ = Artifact{std::move(marked), std::move(provenance), metrics};
}

void SessionRunner::submit(const Intervention& intervention) {
  if (frozen_) illegal("session " + record_.session_id + " is read-only");
  apply(intervention);
}

void SessionRunner::apply(const Intervention& iv) {
  if (is_terminal(state_)) illegal("session is " + std::string(to_string(state_)));
  if (!legal_in(iv, state_)) {
    illegal(std::string(kind_name(iv)) + " is not allowed in state " + std::string(to_string(state_)));
  }

  // Validate everything before the intervention is logged.
  std::optional<planner::SubtaskPlan> edited;
  PipelineConfig tuned = config_;
  std::visit(overloaded{
                 [&](const EditPlan& e) { edited = planner::apply_plan_edit(*plan_, e.edit); },
                 [&](const OverrideReview& o) {
                   if (review_.find(o.subtask_id) == nullptr) {
                     throw Error(ErrorCode::kUnknownSubtask,
                                 "no reviewed component for subtask " + std::to_string(o.subtask_id));
                   }
                   if (!o.accept && component(o.subtask_id)->attempt >= config_.max_retries) {
                     illegal("subtask " + std::to_string(o.subtask_id) + " has no retries left");
                   }
                 },
                 [&](const AdjustLayout& a) {
                   const planner::Subtask* s = plan_->find(a.subtask_id);
                   if (s == nullptr) {
                     throw Error(ErrorCode::kUnknownSubtask, "no subtask " + std::to_string(a.subtask_id));
                   }
                   if (s->is_background()) illegal("the background cannot be moved");
                 },
                 [&](const SetProtectionParams& p) {
                   if (p.amplitude) tuned.amplitude = *p.amplitude;
                   if (p.chips_per_bit) tuned.chips_per_bit = *p.chips_per_bit;
                   try {
                     tuned.validate();
                     const double rms = configured_rms(tuned);
                     if (rms > tuned.lambda) {
                       illegal("watermark rms " + std::to_string(rms) + " exceeds lambda " +
                               std::to_string(tuned.lambda));
                     }
                   } catch (const Error& e) {
                     if (e.code() == ErrorCode::kIllegalIntervention) throw;
                     illegal(e.what());
                   }
                 },
                 [](const Abort&) {},
             },
             iv.kind);

  emit(EventKind::kInterventionApplied, {{"intervention", to_json(iv)}});

  std::visit(overloaded{
                 [&](const EditPlan&) {
                   const planner::SubtaskPlan before = std::move(*plan_);
                   plan_ = std::move(edited);
                   if (state_ != SessionState::kReviewing) return;
                   ++edit_round_;
                   for (const auto& s : before.subtasks) {
                     if (plan_->find(s.id) != nullptr) continue;
                     std::erase_if(components_, [&](const auto& c) { return c.subtask_id == s.id; });
                     std::erase_if(review_.entries, [&](const auto& e) { return e.subtask_id == s.id; });
                     overridden_.erase(s.id);
                     review_.overridden.erase(s.id);
                     pending_.erase(s.id);
                   }
                   for (int id : planner::edited_subtasks(before, *plan_)) {
                     if (plan_->find(id) == nullptr) continue;
                     pending_[id] = kPlanEdit;
                     overridden_.erase(id);
                     review_.overridden.erase(id);
                   }
                   std::vector<double> finals;
                   for (const auto& e : review_.entries) finals.push_back(e.final_score);
                   review_.l_rev = reviewer::review_loss(finals, config_.tau);
                 },
                 [&](const OverrideReview& o) {
                   if (o.accept) {
                     reviewer::accept_override(review_, o.subtask_id);
                     overridden_.insert(o.subtask_id);
                     pending_.erase(o.subtask_id);
                     emit(EventKind::kReviewScored, {{"subtask_id", o.subtask_id},
                                                     {"attempt", component(o.subtask_id)->attempt},
                                                     {"score", review_.find(o.subtask_id)->final_score},
                                                     {"passed", true},
                                                     {"overridden", true}});
                   } else {
                     pending_[o.subtask_id] = kRejected;
                     overridden_.erase(o.subtask_id);
                     review_.overridden.erase(o.subtask_id);
                   }
                 },
                 [&](const AdjustLayout& a) {
                   adjustments_.push_back(a);
                   if (state_ == SessionState::kIntegrating) layout_dirty_ = true;
                 },
                 [&](const SetProtectionParams&) { config_ = tuned; },
                 [&](const Abort& a) { change_state(SessionState::kFailed, {{"reason", a.reason}}); },
             },
             iv.kind);
}

const generator::Component* SessionRunner::component(int subtask_id) const {
  for (const auto& c : components_) {
    if (c.subtask_id == subtask_id) return &c;
  }
  return nullptr;
}

const Artifact& SessionRunner::artifact() const {
  if (!artifact_) {
    throw Error(ErrorCode::kNotReady, "session " + record_.session_id + " is " + std::string(to_string(state_)));
  }
  return *artifact_;
}

nlohmann::json SessionRunner::snapshot() const {
  nlohmann::json j;
  j["session_id"] = record_.session_id;
  j["state"] = to_string(state_);
  j["prompt"] = record_.prompt;
  j["created_ms"] = record_.created_ms;
  j["config"] = to_json(config_);
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : record_.events) events.push_back(event_to_json(e));
  j["events"] = std::move(events);
  if (plan_) {
    j["plan"] = planner::to_json(*plan_);
    j["layout"] = integrator::to_json(current_layout());
  }
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components_) {
    nlohmann::json cj{{"subtask_id", c.subtask_id},
                      {"attempt", c.attempt},
                      {"seed", c.seed_used},
                      {"glyph", c.glyph},
                      {"width", c.image.width()},
                      {"height", c.image.height()}};
    cj["score"] = c.score ? nlohmann::json(*c.score) : nlohmann::json(nullptr);
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  if (!review_.entries.empty()) j["review"] = reviewer::to_json(review_);
  nlohmann::json pending = nlohmann::json::object();
  for (const auto& [id, reason] : pending_) pending[std::to_string(id)] = reason;
  j["pending_regenerations"] = std::move(pending);
  if (record_.metrics) j["metrics"] = to_json(*record_.metrics);
  j["artifact_ready"] = artifact_.has_value();
  return j;
}

}  // namespace provgen::orchestrator
