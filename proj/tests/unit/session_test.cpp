#include "provgen/core/session.hpp"
#include "support.hpp"

using namespace provgen;

namespace {

Event ev(EventKind kind, nlohmann::json payload = nlohmann::json::object()) {
  Event e;
  e.kind = kind;
  e.payload = std::move(payload);
  e.timestamp_ms = 1000;
  return e;
}

Event to(SessionState from, SessionState next) {
  return ev(EventKind::kStateChanged, {{"from", to_string(from)}, {"to", to_string(next)}});
}

std::vector<Event> happy_path() {
  using S = SessionState;
  return {ev(EventKind::kPlanProduced, {{"plan", nlohmann::json::object()}, {"l_plan", 0.0}}),
          to(S::kPlanned, S::kGenerating),
          ev(EventKind::kComponentGenerated, {{"subtask_id", 0}, {"attempt", 0}, {"seed", 1}, {"digest", "x"}}),
          to(S::kGenerating, S::kReviewing),
          ev(EventKind::kReviewScored, {{"subtask_id", 0}, {"attempt", 0}, {"score", 0.1}, {"passed", false}}),
          ev(EventKind::kRegenerationTriggered, {{"subtask_id", 0}, {"attempt", 1}}),
          ev(EventKind::kComponentGenerated, {{"subtask_id", 0}, {"attempt", 1}, {"seed", 2}, {"digest", "y"}}),
          to(S::kGenerating, S::kReviewing),
          ev(EventKind::kReviewScored, {{"subtask_id", 0}, {"attempt", 1}, {"score", 0.9}, {"passed", true}}),
          to(S::kReviewing, S::kIntegrating),
          ev(EventKind::kSceneIntegrated, {{"stage", "composited"}, {"digest", "z"}}),
          to(S::kIntegrating, S::kProtecting),
          ev(EventKind::kWatermarkEmbedded, {{"digest_pre", "a"}, {"digest_post", "b"}}),
          ev(EventKind::kStateChanged,
             {{"from", "Protecting"},
              {"to", "Done"},
              {"metrics", to_json(MetricsReport::make(0.1, 0.2, 0.3, 0.4))}})};
}

}  // namespace

TEST(Session, NamesRoundTrip) {
  for (int i = 0; i <= static_cast<int>(SessionState::kFailed); ++i) {
    const auto s = static_cast<SessionState>(i);
    EXPECT_EQ(parse_state(to_string(s)), s);
  }
  for (int i = 0; i <= static_cast<int>(EventKind::kError); ++i) {
    const auto k = static_cast<EventKind>(i);
    EXPECT_EQ(parse_event_kind(to_string(k)), k);
  }
  EXPECT_CODE(parse_state("Sleeping"), ErrorCode::kMalformedRecord);
}

TEST(Session, HappyPathFoldsToDone) {
  SessionRecord r;
  r.session_id = "s1";
  for (auto& e : happy_path()) apply_event(r, e);
  EXPECT_EQ(r.state, SessionState::kDone);
  ASSERT_TRUE(r.metrics.has_value());
  EXPECT_EQ(r.metrics->l_joint, 0.1 + 0.2 + 0.3 + 0.4);
  for (std::size_t i = 0; i < r.events.size(); ++i) EXPECT_EQ(r.events[i].seq, i + 1);
  EXPECT_EQ(replay_state(r.events), SessionState::kDone);
}

TEST(Session, TransitionTable) {
  using S = SessionState;
  using K = EventKind;
  // Work events are legal only inside their own stage.
  const std::vector<std::pair<K, S>> legal{{K::kPlanProduced, S::kCreated},      {K::kComponentGenerated, S::kGenerating},
                                           {K::kReviewScored, S::kReviewing},    {K::kRegenerationTriggered, S::kReviewing},
                                           {K::kSceneIntegrated, S::kIntegrating}, {K::kWatermarkEmbedded, S::kProtecting}};
  for (const auto& [kind, home] : legal) {
    for (int i = 0; i <= static_cast<int>(S::kFailed); ++i) {
      const auto s = static_cast<S>(i);
      const bool ok = s == home || (kind == K::kPlanProduced && s == S::kPlanned);
      if (ok) {
        EXPECT_NO_THROW(next_state(s, ev(kind)));
      } else {
        EXPECT_CODE(next_state(s, ev(kind)), ErrorCode::kIllegalTransition);
      }
    }
  }
  EXPECT_EQ(next_state(S::kReviewing, ev(K::kRegenerationTriggered)), S::kGenerating);
  // Skipping a stage is illegal; failing is always allowed from a live state.
  EXPECT_CODE(next_state(S::kPlanned, to(S::kPlanned, S::kReviewing)), ErrorCode::kIllegalTransition);
  EXPECT_CODE(next_state(S::kCreated, to(S::kCreated, S::kPlanned)), ErrorCode::kIllegalTransition);
  for (S s : {S::kCreated, S::kPlanned, S::kGenerating, S::kReviewing, S::kIntegrating, S::kProtecting}) {
    EXPECT_EQ(next_state(s, to(s, S::kFailed)), S::kFailed);
    EXPECT_EQ(next_state(s, ev(K::kInterventionApplied)), s);
    EXPECT_EQ(next_state(s, ev(K::kError)), s);
  }
  for (S s : {S::kDone, S::kFailed}) {
    EXPECT_CODE(next_state(s, ev(K::kError)), ErrorCode::kIllegalTransition);
    EXPECT_CODE(next_state(s, ev(K::kInterventionApplied)), ErrorCode::kIllegalTransition);
  }
}

TEST(Session, SerializationRoundTrip) {
  SessionRecord r;
  r.session_id = "abc";
  r.prompt = "a red dragon";
  r.config.seed = 99;
  r.created_ms = 123;
  for (auto& e : happy_path()) apply_event(r, e);
  const std::string text = serialize_session(r);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(r.events.size() + 1));
  EXPECT_EQ(deserialize_session(text), r);
  EXPECT_EQ(serialize_header(r) + [&] {
    std::string s;
    for (auto& e : r.events) s += serialize_event(e);
    return s;
  }(), text);
}

TEST(Session, DeserializeRejectsBadLogs) {
  SessionRecord r;
  r.session_id = "abc";
  r.prompt = "p";
  const std::string header = serialize_header(r);
  EXPECT_CODE(deserialize_session(""), ErrorCode::kMalformedRecord);
  EXPECT_CODE(deserialize_session(header + "{not json}\n"), ErrorCode::kMalformedRecord);
  // Well-formed JSON, but illegal in the transition table.
  Event bad = ev(EventKind::kWatermarkEmbedded, {{"digest_pre", "a"}, {"digest_post", "b"}});
  bad.seq = 1;
  EXPECT_CODE(deserialize_session(header + serialize_event(bad)), ErrorCode::kMalformedRecord);
  // Missing required payload key.
  Event partial = ev(EventKind::kPlanProduced, {{"plan", nlohmann::json::object()}});
  partial.seq = 1;
  EXPECT_CODE(deserialize_session(header + serialize_event(partial)), ErrorCode::kMalformedRecord);
}

TEST(Metrics, JointIsExactSum) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(), b = rng.uniform(0, 3), c = rng.uniform(0, 2), d = rng.uniform(0, 20);
    const auto m = MetricsReport::make(a, b, c, d);
    EXPECT_EQ(m.l_joint, a + b + c + d);
    EXPECT_EQ(metrics_from_json(to_json(m)), m);
  }
}
