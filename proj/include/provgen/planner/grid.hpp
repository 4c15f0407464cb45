#pragma once

#include <map>

#include "provgen/planner/plan.hpp"

namespace provgen::planner {

struct GridSlot {
  int row = 1;
  int col = 1;
  int depth = 1;
  bool over = false;  // stacked over its target's cell
};

/// Resolves foreground subtasks onto the 3x3 grid. Relations are strict
/// orderings (above => smaller row); "over" shares the target's cell with a
/// greater depth. Throws kCyclicLayout or kUnsatisfiableLayout.
std::map<int, GridSlot> resolve_grid(const SubtaskPlan& plan);

}  // namespace provgen::planner
