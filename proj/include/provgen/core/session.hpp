#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/core/config.hpp"

namespace provgen {

enum class SessionState {
  kCreated,
  kPlanned,
  kGenerating,
  kReviewing,
  kIntegrating,
  kProtecting,
  kDone,
  kFailed,
};

enum class EventKind {
  kPlanProduced,
  kComponentGenerated,
  kReviewScored,
  kRegenerationTriggered,
  kSceneIntegrated,
  kWatermarkEmbedded,
  kInterventionApplied,
  kStateChanged,
  kError,
};

std::string_view to_string(SessionState state);
std::string_view to_string(EventKind kind);
SessionState parse_state(std::string_view name);
EventKind parse_event_kind(std::string_view name);

bool is_terminal(SessionState state);

struct Event {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::kError;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const Event&) const = default;
};

/// Loss diagnostics of one completed run. `l_joint` is always the plain sum
/// of the four terms, computed once in `make`.
struct MetricsReport {
  double l_plan = 0.0;
  double l_rev = 0.0;
  double l_int = 0.0;
  double l_prot = 0.0;
  double l_joint = 0.0;

  static MetricsReport make(double plan, double rev, double integ, double prot);
  bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

struct SessionRecord {
  std::string session_id;
  std::string prompt;
  PipelineConfig config;
  std::int64_t created_ms = 0;
  SessionState state = SessionState::kCreated;
  std::vector<Event> events;
  std::optional<MetricsReport> metrics;

  bool operator==(const SessionRecord&) const = default;
};

/// State reached by applying `event` in `state`. Throws kIllegalTransition.
///
/// Work events are legal only inside their stage; StateChanged advances one
/// step along Planned -> Generating -> Reviewing -> Integrating -> Protecting
/// -> Done, or moves any live session to Failed. RegenerationTriggered is the
/// only back-edge (Reviewing -> Generating). Interventions and errors are
/// accepted in every non-terminal state and leave it unchanged.
SessionState next_state(SessionState state, const Event& event);

/// Appends `event` (seq assigned as last + 1) and advances the cached state.
void apply_event(SessionRecord& session, Event event);
SessionRecord transition(SessionRecord session, Event event);

/// Folds a complete event log from Created.
SessionState replay_state(const std::vector<Event>& events);

/// JSON-lines encoding: header line (session metadata and config), then one
/// line per event.
std::string serialize_session(const SessionRecord& session);
std::string serialize_header(const SessionRecord& session);
std::string serialize_event(const Event& event);

/// Throws kMalformedRecord with line/column information.
SessionRecord deserialize_session(std::string_view bytes);

nlohmann::json event_to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);

}  // namespace provgen
