#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/planner/plan.hpp"

namespace provgen::integrator {

/// Half-open pixel box [x0,x1) x [y0,y1).
struct Box {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  /// True if the boxes overlap or touch once `this` is grown by `dilation`.
  bool touches(const Box& other, int dilation) const;
  bool operator==(const Box&) const = default;
};

struct Placement {
  int subtask_id = 0;
  Box box;
  int depth = 1;
  bool background = false;
};

using Adjacency = std::set<std::pair<int, int>>;  // ordered (lo, hi)

inline constexpr int kAdjacencyDilation = 2;

struct Layout {
  int scene_size = 0;
  std::vector<Placement> placements;  // paint order: depth, then id
  Adjacency adjacency;

  const Placement* find(int subtask_id) const;
  Placement* find(int subtask_id);
};

/// Grid box of cell (row, col) in a scene of side `size`.
Box cell_box(int row, int col, int size);

/// Maps grid slots to boxes; the background takes the full frame below every
/// foreground.
Layout resolve_layout(const planner::SubtaskPlan& plan, int scene_size);

/// Recomputes paint order and foreground adjacency after boxes moved.
void refresh(Layout& layout);

/// Moves a placement by (dx, dy) and optionally sets its depth, clamping the
/// box into the frame. Throws kUnknownSubtask.
void adjust_placement(Layout& layout, int subtask_id, int dx, int dy, std::optional<int> depth);

nlohmann::json to_json(const Layout& layout);

}  // namespace provgen::integrator
