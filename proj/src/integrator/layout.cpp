#include "provgen/integrator/layout.hpp"

#include <algorithm>
#include <cmath>

#include "provgen/core/error.hpp"
#include "provgen/planner/grid.hpp"

namespace provgen::integrator {

bool Box::touches(const Box& o, int d) const {
  return x0 - d < o.x1 && o.x0 < x1 + d && y0 - d < o.y1 && o.y0 < y1 + d;
}

const Placement* Layout::find(int id) const {
  for (const auto& p : placements) {
    if (p.subtask_id == id) return &p;
  }
  return nullptr;
}

Placement* Layout::find(int id) { return const_cast<Placement*>(std::as_const(*this).find(id)); }

Box cell_box(int row, int col, int size) {
  auto edge = [size](int k) { return static_cast<int>(std::lround(size * k / 3.0)); };
  return {edge(col), edge(row), edge(col + 1), edge(row + 1)};
}

void refresh(Layout& layout) {
  std::stable_sort(layout.placements.begin(), layout.placements.end(), [](const Placement& a, const Placement& b) {
    if (a.background != b.background) return a.background;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.subtask_id < b.subtask_id;
  });
  layout.adjacency.clear();
  for (std::size_t i = 0; i < layout.placements.size(); ++i) {
    const Placement& a = layout.placements[i];
    if (a.background) continue;
    for (std::size_t j = i + 1; j < layout.placements.size(); ++j) {
      const Placement& b = layout.placements[j];
      if (b.background) continue;
      if (a.box.touches(b.box, kAdjacencyDilation)) {
        layout.adjacency.insert(std::minmax(a.subtask_id, b.subtask_id));
      }
    }
  }
}

Layout resolve_layout(const planner::SubtaskPlan& plan, int scene_size) {
  if (scene_size < 16) throw Error(ErrorCode::kInvalidArgument, "scene too small");
  const auto slots = planner::resolve_grid(plan);
  Layout layout;
  layout.scene_size = scene_size;
  int min_depth = 0;
  for (const auto& [id, slot] : slots) min_depth = std::min(min_depth, slot.depth);
  for (const auto& s : plan.subtasks) {
    Placement p;
    p.subtask_id = s.id;
    if (s.is_background()) {
      p.background = true;
      p.box = {0, 0, scene_size, scene_size};
      p.depth = min_depth - 1;
    } else {
      const planner::GridSlot& slot = slots.at(s.id);
      p.box = cell_box(slot.row, slot.col, scene_size);
      if (slot.over) {
        const int shift = std::min(p.box.height() / 4, p.box.y0);
        p.box.y0 -= shift;
        p.box.y1 -= shift;
      }
      p.depth = slot.depth;
    }
    layout.placements.push_back(p);
  }
  refresh(layout);
  return layout;
}

void adjust_placement(Layout& layout, int id, int dx, int dy, std::optional<int> depth) {
  Placement* p = layout.find(id);
  if (p == nullptr) throw Error(ErrorCode::kUnknownSubtask, "no placement for subtask " + std::to_string(id));
  if (p->background) throw Error(ErrorCode::kInvalidArgument, "the background cannot be moved");
  const int w = p->box.width(), h = p->box.height();
  const int x0 = std::clamp(p->box.x0 + dx, 0, layout.scene_size - w);
  const int y0 = std::clamp(p->box.y0 + dy, 0, layout.scene_size - h);
  p->box = {x0, y0, x0 + w, y0 + h};
  if (depth) p->depth = *depth;
  refresh(layout);
}

nlohmann::json to_json(const Layout& layout) {
  nlohmann::json placements = nlohmann::json::array();
  for (const auto& p : layout.placements) {
    placements.push_back({{"subtask_id", p.subtask_id},
                          {"box", {p.box.x0, p.box.y0, p.box.x1, p.box.y1}},
                          {"depth", p.depth},
                          {"background", p.background}});
  }
  nlohmann::json adjacency = nlohmann::json::array();
  for (const auto& [a, b] : layout.adjacency) adjacency.push_back({a, b});
  return {{"scene_size", layout.scene_size}, {"placements", placements}, {"adjacency", adjacency}};
}

}  // namespace provgen::integrator
