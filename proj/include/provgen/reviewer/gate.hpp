#pragma once

#include <functional>
#include <set>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/core/config.hpp"
#include "provgen/core/session.hpp"
#include "provgen/generator/component.hpp"
#include "provgen/reviewer/scorer.hpp"

namespace provgen::reviewer {

struct ReviewEntry {
  int subtask_id = 0;
  int attempts = 1;  // scored attempts including the first
  double final_score = 0;
  bool passed = false;
  bool exhausted = false;  // retries ran out below tau
  std::vector<double> history;
};

struct ReviewReport {
  std::vector<ReviewEntry> entries;
  double l_rev = 0;
  std::set<int> overridden;

  ReviewEntry* find(int subtask_id);
  const ReviewEntry* find(int subtask_id) const;
};

nlohmann::json to_json(const ReviewReport& report);

struct GateOptions {
  double tau = 0.25;
  int max_retries = 3;
  ReviewPolicy policy = ReviewPolicy::kAcceptBest;
  bool no_reviewer = false;
  std::set<int> overridden;
};

using ScoreFn = std::function<AlignmentScore(const generator::Component&)>;
/// Produces the next attempt; throws kRetriesExhausted when none is left.
using RegenFn = std::function<generator::Component(const generator::Component&)>;
using EventSink = std::function<void(EventKind, nlohmann::json)>;

/// Scores every component and regenerates those under tau, keeping the best
/// attempt in place. Emits ReviewScored per attempt and RegenerationTriggered
/// per retry. Throws kSessionFailure under the strict policy when a component
/// never clears tau and is not overridden.
ReviewReport review_gate(std::vector<generator::Component>& components, const GateOptions& options,
                         const ScoreFn& score, const RegenFn& regen, const EventSink& sink);

/// Sum of max(0, tau - s).
double review_loss(std::span<const double> scores, double tau);

/// Marks a subtask as accepted by a human. l_rev keeps measuring raw scores.
void accept_override(ReviewReport& report, int subtask_id);

}  // namespace provgen::reviewer
