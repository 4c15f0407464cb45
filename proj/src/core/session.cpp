#include "provgen/core/session.hpp"

#include <array>
#include <map>
#include <set>
#include <utility>

#include "provgen/core/error.hpp"

namespace provgen {

namespace {

constexpr std::array<std::pair<SessionState, std::string_view>, 8> kStateNames{{
    {SessionState::kCreated, "Created"},
    {SessionState::kPlanned, "Planned"},
    {SessionState::kGenerating, "Generating"},
    {SessionState::kReviewing, "Reviewing"},
    {SessionState::kIntegrating, "Integrating"},
    {SessionState::kProtecting, "Protecting"},
    {SessionState::kDone, "Done"},
    {SessionState::kFailed, "Failed"},
}};

constexpr std::array<std::pair<EventKind, std::string_view>, 9> kKindNames{{
    {EventKind::kPlanProduced, "PlanProduced"},
    {EventKind::kComponentGenerated, "ComponentGenerated"},
    {EventKind::kReviewScored, "ReviewScored"},
    {EventKind::kRegenerationTriggered, "RegenerationTriggered"},
    {EventKind::kSceneIntegrated, "SceneIntegrated"},
    {EventKind::kWatermarkEmbedded, "WatermarkEmbedded"},
    {EventKind::kInterventionApplied, "InterventionApplied"},
    {EventKind::kStateChanged, "StateChanged"},
    {EventKind::kError, "Error"},
}};

// Required payload keys per kind; extra keys are allowed.
const std::map<EventKind, std::vector<std::string>>& payload_schema() {
  static const std::map<EventKind, std::vector<std::string>> schema{
      {EventKind::kPlanProduced, {"plan", "l_plan"}},
      {EventKind::kComponentGenerated, {"subtask_id", "attempt", "seed", "digest"}},
      {EventKind::kReviewScored, {"subtask_id", "attempt", "score", "passed"}},
      {EventKind::kRegenerationTriggered, {"subtask_id", "attempt"}},
      {EventKind::kSceneIntegrated, {"stage", "digest"}},
      {EventKind::kWatermarkEmbedded, {"digest_pre", "digest_post"}},
      {EventKind::kInterventionApplied, {"intervention"}},
      {EventKind::kStateChanged, {"from", "to"}},
      {EventKind::kError, {"code", "message"}},
  };
  return schema;
}

[[noreturn]] void illegal(SessionState state, const Event& event) {
  throw Error(ErrorCode::kIllegalTransition, "event " + std::string(to_string(event.kind)) +
                                                 " is illegal in state " +
                                                 std::string(to_string(state)));
}

// The forward order of stage states; Created is entered only via PlanProduced.
std::optional<SessionState> successor(SessionState s) {
  switch (s) {
    case SessionState::kPlanned: return SessionState::kGenerating;
    case SessionState::kGenerating: return SessionState::kReviewing;
    case SessionState::kReviewing: return SessionState::kIntegrating;
    case SessionState::kIntegrating: return SessionState::kProtecting;
    case SessionState::kProtecting: return SessionState::kDone;
    default: return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(SessionState state) {
  for (const auto& [s, name] : kStateNames) {
    if (s == state) return name;
  }
  return "?";
}

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

SessionState parse_state(std::string_view name) {
  for (const auto& [s, n] : kStateNames) {
    if (n == name) return s;
  }
  throw Error(ErrorCode::kMalformedRecord, "unknown session state '" + std::string(name) + "'");
}

EventKind parse_event_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::kMalformedRecord, "unknown event kind '" + std::string(name) + "'");
}

bool is_terminal(SessionState state) {
  return state == SessionState::kDone || state == SessionState::kFailed;
}

MetricsReport MetricsReport::make(double plan, double rev, double integ, double prot) {
  MetricsReport m;
  m.l_plan = plan;
  m.l_rev = rev;
  m.l_int = integ;
  m.l_prot = prot;
  m.l_joint = plan + rev + integ + prot;
  return m;
}

nlohmann::json to_json(const MetricsReport& m) {
  return {{"l_plan", m.l_plan}, {"l_rev", m.l_rev}, {"l_int", m.l_int},
          {"l_prot", m.l_prot}, {"l_joint", m.l_joint}};
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport m;
  m.l_plan = j.at("l_plan").get<double>();
  m.l_rev = j.at("l_rev").get<double>();
  m.l_int = j.at("l_int").get<double>();
  m.l_prot = j.at("l_prot").get<double>();
  m.l_joint = j.at("l_joint").get<double>();
  return m;
}

SessionState next_state(SessionState state, const Event& event) {
  if (is_terminal(state)) illegal(state, event);
  switch (event.kind) {
    case EventKind::kPlanProduced:
      if (state == SessionState::kCreated || state == SessionState::kPlanned) return SessionState::kPlanned;
      break;
    case EventKind::kComponentGenerated:
      if (state == SessionState::kGenerating) return state;
      break;
    case EventKind::kReviewScored:
      if (state == SessionState::kReviewing) return state;
      break;
    case EventKind::kRegenerationTriggered:
      if (state == SessionState::kReviewing) return SessionState::kGenerating;
      break;
    case EventKind::kSceneIntegrated:
      if (state == SessionState::kIntegrating) return state;
      break;
    case EventKind::kWatermarkEmbedded:
      if (state == SessionState::kProtecting) return state;
      break;
    case EventKind::kInterventionApplied:
    case EventKind::kError:
      return state;
    case EventKind::kStateChanged: {
      const auto it = event.payload.find("to");
      if (it == event.payload.end() || !it->is_string()) illegal(state, event);
      const SessionState to = parse_state(it->get<std::string>());
      if (to == SessionState::kFailed) return to;
      if (successor(state) == to) return to;
      break;
    }
  }
  illegal(state, event);
}

void apply_event(SessionRecord& session, Event event) {
  const SessionState next = next_state(session.state, event);
  event.seq = session.events.empty() ? 1 : session.events.back().seq + 1;
  if (event.kind == EventKind::kStateChanged && next == SessionState::kDone) {
    if (auto it = event.payload.find("metrics"); it != event.payload.end()) {
      session.metrics = metrics_from_json(*it);
    }
  }
  session.events.push_back(std::move(event));
  session.state = next;
}

SessionRecord transition(SessionRecord session, Event event) {
  apply_event(session, std::move(event));
  return session;
}

SessionState replay_state(const std::vector<Event>& events) {
  SessionState state = SessionState::kCreated;
  for (const Event& e : events) state = next_state(state, e);
  return state;
}

nlohmann::json event_to_json(const Event& e) {
  return {{"seq", e.seq}, {"ts", e.timestamp_ms}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

Event event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "event must be an object");
  static const std::set<std::string> kKeys = {"seq", "ts", "kind", "payload"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::kMalformedRecord, "unknown event field '" + key + "'");
  }
  for (const auto& key : kKeys) {
    if (!j.contains(key)) throw Error(ErrorCode::kMalformedRecord, "event missing field '" + key + "'");
  }
  Event e;
  if (!j.at("seq").is_number_unsigned() || !j.at("ts").is_number_integer() ||
      !j.at("kind").is_string() || !j.at("payload").is_object()) {
    throw Error(ErrorCode::kMalformedRecord, "event field has wrong type");
  }
  e.seq = j.at("seq").get<std::uint64_t>();
  e.timestamp_ms = j.at("ts").get<std::int64_t>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.payload = j.at("payload");
  for (const auto& key : payload_schema().at(e.kind)) {
    if (!e.payload.contains(key)) {
      throw Error(ErrorCode::kMalformedRecord, std::string(to_string(e.kind)) +
                                                   " payload missing '" + key + "'");
    }
  }
  return e;
}

std::string serialize_header(const SessionRecord& s) {
  const nlohmann::json header{{"schema", "provgen.session/1"},
                              {"session_id", s.session_id},
                              {"prompt", s.prompt},
                              {"created_ms", s.created_ms},
                              {"config", to_json(s.config)}};
  return header.dump() + "\n";
}

std::string serialize_event(const Event& e) { return event_to_json(e).dump() + "\n"; }

std::string serialize_session(const SessionRecord& s) {
  std::string out = serialize_header(s);
  for (const Event& e : s.events) out += serialize_event(e);
  return out;
}

SessionRecord deserialize_session(std::string_view bytes) {
  SessionRecord s;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::kMalformedRecord, "session log line " + std::to_string(line_no) +
                                                 " (byte " + std::to_string(offset) + "): " + what);
  };
  if (bytes.empty()) {
    line_no = 1;
    fail("empty record");
  }
  while (offset < bytes.size()) {
    ++line_no;
    const std::size_t end = bytes.find('\n', offset);
    if (end == std::string_view::npos) fail("truncated line (missing newline)");
    const std::string_view line = bytes.substr(offset, end - offset);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    try {
      if (line_no == 1) {
        static const std::set<std::string> kKeys = {"schema", "session_id", "prompt", "created_ms", "config"};
        if (!j.is_object()) fail("header must be an object");
        for (const auto& [key, _] : j.items()) {
          if (!kKeys.contains(key)) fail("unknown header field '" + key + "'");
        }
        if (j.value("schema", "") != "provgen.session/1") fail("unsupported schema");
        s.session_id = j.at("session_id").get<std::string>();
        s.prompt = j.at("prompt").get<std::string>();
        s.created_ms = j.at("created_ms").get<std::int64_t>();
        s.config = config_from_json(j.at("config"));
      } else {
        Event e = event_from_json(j);
        const std::uint64_t expected = s.events.empty() ? 1 : s.events.back().seq + 1;
        if (e.seq != expected) fail("sequence gap: expected " + std::to_string(expected));
        apply_event(s, std::move(e));
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMalformedRecord && std::string_view(e.what()).starts_with("session log")) throw;
      fail(e.what());
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    offset = end + 1;
  }
  return s;
}

}  // namespace provgen
