#include "provgen/reviewer/gate.hpp"

#include <algorithm>

#include "provgen/core/error.hpp"

namespace provgen::reviewer {

ReviewEntry* ReviewReport::find(int id) {
  for (auto& e : entries) {
    if (e.subtask_id == id) return &e;
  }
  return nullptr;
}

const ReviewEntry* ReviewReport::find(int id) const {
  return const_cast<ReviewReport*>(this)->find(id);
}

nlohmann::json to_json(const ReviewReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"subtask_id", e.subtask_id},
                       {"attempts", e.attempts},
                       {"final_score", e.final_score},
                       {"passed", e.passed},
                       {"exhausted", e.exhausted},
                       {"history", e.history}});
  }
  return {{"entries", entries}, {"l_rev", r.l_rev}, {"overridden", r.overridden}};
}

double review_loss(std::span<const double> scores, double tau) {
  double sum = 0;
  for (double s : scores) sum += std::max(0.0, tau - s);
  return sum;
}

void accept_override(ReviewReport& report, int subtask_id) {
  ReviewEntry* e = report.find(subtask_id);
  if (e == nullptr) throw Error(ErrorCode::kUnknownSubtask, "no review entry for subtask " + std::to_string(subtask_id));
  e->passed = true;
  report.overridden.insert(subtask_id);
}

ReviewReport review_gate(std::vector<generator::Component>& components, const GateOptions& opt,
                         const ScoreFn& score, const RegenFn& regen, const EventSink& sink) {
  if (!(opt.tau >= 0.0 && opt.tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in [0,1]");
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.subtask_id < b.subtask_id; });

  ReviewReport report;
  report.overridden = opt.overridden;
  std::vector<double> finals;
  for (auto& component : components) {
    ReviewEntry entry;
    entry.subtask_id = component.subtask_id;
    const bool overridden = opt.overridden.count(component.subtask_id) > 0;

    auto record = [&](generator::Component& c) {
      const double s = score(c).value;
      c.score = s;
      entry.history.push_back(s);
      sink(EventKind::kReviewScored, {{"subtask_id", c.subtask_id},
                                      {"attempt", c.attempt},
                                      {"score", s},
                                      {"passed", opt.no_reviewer || overridden || s >= opt.tau}});
      return s;
    };

    generator::Component best = component;
    double best_score = record(best);
    generator::Component current = best;
    const bool gated = !opt.no_reviewer && !overridden;
    while (gated && best_score < opt.tau) {
      if (current.attempt >= opt.max_retries) {
        entry.exhausted = true;
        break;
      }
      sink(EventKind::kRegenerationTriggered,
           {{"subtask_id", current.subtask_id}, {"attempt", current.attempt + 1}, {"seed_prev", current.seed_used}});
      try {
        current = regen(current);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kRetriesExhausted) throw;
        entry.exhausted = true;
        break;
      }
      const double s = record(current);
      if (s > best_score) {
        best = current;
        best_score = s;
      }
    }

    entry.attempts = static_cast<int>(entry.history.size());
    entry.final_score = best_score;
    entry.passed = !gated || best_score >= opt.tau || opt.policy == ReviewPolicy::kAcceptBest;
    component = std::move(best);
    finals.push_back(best_score);
    report.entries.push_back(entry);
    if (!entry.passed) {
      report.l_rev = review_loss(finals, opt.tau);
      throw Error(ErrorCode::kSessionFailure, "subtask " + std::to_string(entry.subtask_id) + " stayed below tau after " +
                                                  std::to_string(entry.attempts) + " attempts");
    }
  }
  report.l_rev = review_loss(finals, opt.tau);
  return report;
}

}  // namespace provgen::reviewer
