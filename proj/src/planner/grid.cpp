#include "provgen/planner/grid.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "provgen/core/error.hpp"

namespace provgen::planner {

namespace {

constexpr int kGridSize = 3;
constexpr int kExhaustiveLimit = 12;

struct Edge {
  int lo;  // position[lo] < position[hi]
  int hi;
};

std::vector<int> topological_order(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> out(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : edges) {
    out[e.lo].push_back(e.hi);
    ++indegree[e.hi];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int g = ready.top();
    ready.pop();
    order.push_back(g);
    for (int next : out[g]) {
      if (--indegree[next] == 0) ready.push(next);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw Error(ErrorCode::kCyclicLayout, "layout relations are contradictory (ordering cycle)");
  }
  return order;
}

// Assigns each group a position in [0, kGridSize) honoring fixed anchors and
// strict orderings, preferring `preferred` where the bounds allow.
std::vector<int> solve_axis(int n, const std::vector<std::optional<int>>& fixed,
                            const std::vector<Edge>& edges, const std::vector<int>& preferred,
                            const char* axis) {
  for (const auto& e : edges) {
    if (e.lo == e.hi) throw Error(ErrorCode::kCyclicLayout, "entity ordered against itself");
  }
  const std::vector<int> order = topological_order(n, edges);
  std::vector<int> lower(n), upper(n);
  for (int g = 0; g < n; ++g) {
    lower[g] = fixed[g].value_or(0);
    upper[g] = fixed[g].value_or(kGridSize - 1);
  }
  for (int g : order) {
    for (const auto& e : edges) {
      if (e.lo == g) lower[e.hi] = std::max(lower[e.hi], lower[g] + 1);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (const auto& e : edges) {
      if (e.hi == *it) upper[e.lo] = std::min(upper[e.lo], upper[*it] - 1);
    }
  }
  for (int g : order) {
    if (lower[g] > upper[g]) {
      throw Error(ErrorCode::kUnsatisfiableLayout,
                  std::string("layout needs more than 3 ") + axis + " on the grid");
    }
  }
  // Exhaustive search for the assignment closest to the preferred positions;
  // ties go to the lexicographically first one. Larger groups fall back to a
  // greedy pass.
  std::vector<int> pos(n, 0);
  if (n <= kExhaustiveLimit) {
    std::vector<int> cur(n, 0);
    int best = -1;
    std::function<void(int, int)> search = [&](int g, int cost) {
      if (best >= 0 && cost >= best) return;
      if (g == n) {
        best = cost;
        pos = cur;
        return;
      }
      for (int p = lower[g]; p <= upper[g]; ++p) {
        cur[g] = p;
        bool ok = true;
        for (const auto& e : edges) {
          if (e.lo <= g && e.hi <= g && cur[e.lo] >= cur[e.hi]) ok = false;
        }
        if (ok) search(g + 1, cost + std::abs(p - preferred[g]));
      }
    };
    search(0, 0);
    return pos;
  }
  for (int g : order) {
    int p = std::clamp(preferred[g], lower[g], upper[g]);
    for (const auto& e : edges) {
      if (e.hi == g) p = std::max(p, pos[e.lo] + 1);
    }
    pos[g] = p;
  }
  return pos;
}

}  // namespace

std::map<int, GridSlot> resolve_grid(const SubtaskPlan& plan) {
  std::vector<const Subtask*> fg;
  std::map<int, int> index;
  for (const auto& s : plan.subtasks) {
    if (s.is_background()) continue;
    index[s.id] = static_cast<int>(fg.size());
    fg.push_back(&s);
  }
  const int n = static_cast<int>(fg.size());

  // Relation graph (subject -> target) must be acyclic.
  std::vector<int> target(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!fg[i]->layout) continue;
    if (const auto* rel = std::get_if<RelativePlacement>(&fg[i]->layout->position)) {
      const auto it = index.find(rel->target);
      if (it == index.end()) {
        throw Error(ErrorCode::kInvalidPlan, "relation target " + std::to_string(rel->target) + " is not a foreground subtask");
      }
      target[i] = it->second;
    }
  }
  for (int i = 0; i < n; ++i) {
    int steps = 0;
    for (int cur = target[i]; cur >= 0; cur = target[cur]) {
      if (cur == i || ++steps > n) {
        throw Error(ErrorCode::kCyclicLayout, "layout relations form a cycle through subtask " + std::to_string(fg[i]->id));
      }
    }
  }

  // "over" merges subject and target into one cell group.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int v) { return parent[v] == v ? v : parent[v] = root(parent[v]); };
  for (int i = 0; i < n; ++i) {
    if (target[i] < 0) continue;
    if (std::get<RelativePlacement>(fg[i]->layout->position).relation == Relation::kOver) {
      parent[root(i)] = root(target[i]);
    }
  }
  std::map<int, int> group_of_root;
  std::vector<int> group(n);
  for (int i = 0; i < n; ++i) {
    const int r = root(i);
    const auto [it, _] = group_of_root.emplace(r, static_cast<int>(group_of_root.size()));
    group[i] = it->second;
  }
  const int groups = static_cast<int>(group_of_root.size());

  std::vector<std::optional<int>> fixed_row(groups), fixed_col(groups);
  std::vector<int> group_size(groups, 0);
  std::vector<bool> constrained(groups, false);
  std::vector<Edge> row_edges, col_edges;
  for (int i = 0; i < n; ++i) {
    const int g = group[i];
    ++group_size[g];
    if (!fg[i]->layout) continue;
    constrained[g] = true;
    if (const auto* cell = std::get_if<GridCell>(&fg[i]->layout->position)) {
      const int r = cell_row(*cell), c = cell_col(*cell);
      if ((fixed_row[g] && *fixed_row[g] != r) || (fixed_col[g] && *fixed_col[g] != c)) {
        throw Error(ErrorCode::kUnsatisfiableLayout, "stacked entities anchored to different cells");
      }
      fixed_row[g] = r;
      fixed_col[g] = c;
      continue;
    }
    const auto rel = std::get<RelativePlacement>(fg[i]->layout->position).relation;
    const int a = g, b = group[target[i]];
    constrained[b] = true;
    switch (rel) {
      case Relation::kAbove: row_edges.push_back({a, b}); break;
      case Relation::kBelow: row_edges.push_back({b, a}); break;
      case Relation::kLeftOf: col_edges.push_back({a, b}); break;
      case Relation::kRightOf: col_edges.push_back({b, a}); break;
      case Relation::kOver: break;
    }
  }

  // Entities with no constraint at all spread across the middle row.
  std::vector<int> free_groups;
  for (int g = 0; g < groups; ++g) {
    if (!constrained[g] && group_size[g] == 1) free_groups.push_back(g);
  }
  std::vector<int> preferred_row(groups, 1), preferred_col(groups, 1);
  if (free_groups.size() > 1) {
    const double m = static_cast<double>(free_groups.size());
    for (std::size_t j = 0; j < free_groups.size(); ++j) {
      const int col = static_cast<int>(std::lround((static_cast<double>(j) + 0.5) * kGridSize / m - 0.5));
      preferred_col[free_groups[j]] = std::clamp(col, 0, kGridSize - 1);
    }
  }

  auto rows = solve_axis(groups, fixed_row, row_edges, preferred_row, "rows");
  auto cols = solve_axis(groups, fixed_col, col_edges, preferred_col, "columns");

  // Groups sharing a cell move to the nearest free cell that keeps every
  // anchor and ordering; if none exists they stay stacked.
  auto consistent = [&](int g, int r, int c) {
    if ((fixed_row[g] && *fixed_row[g] != r) || (fixed_col[g] && *fixed_col[g] != c)) return false;
    for (const auto& e : row_edges) {
      const int lo = e.lo == g ? r : rows[e.lo], hi = e.hi == g ? r : rows[e.hi];
      if ((e.lo == g || e.hi == g) && lo >= hi) return false;
    }
    for (const auto& e : col_edges) {
      const int lo = e.lo == g ? c : cols[e.lo], hi = e.hi == g ? c : cols[e.hi];
      if ((e.lo == g || e.hi == g) && lo >= hi) return false;
    }
    return true;
  };
  std::vector<int> occupant(kGridSize * kGridSize, -1);
  for (int g = 0; g < groups; ++g) {
    int& here = occupant[rows[g] * kGridSize + cols[g]];
    if (here < 0) {
      here = g;
      continue;
    }
    int best = -1, best_dist = 0;
    for (int cell = 0; cell < kGridSize * kGridSize; ++cell) {
      const int r = cell / kGridSize, c = cell % kGridSize;
      if (occupant[cell] >= 0 || !consistent(g, r, c)) continue;
      const int dist = std::abs(r - rows[g]) + std::abs(c - cols[g]);
      if (best < 0 || dist < best_dist) {
        best = cell;
        best_dist = dist;
      }
    }
    if (best < 0) continue;
    rows[g] = best / kGridSize;
    cols[g] = best % kGridSize;
    occupant[best] = g;
  }

  // Depth: an "over" subject always sits nearer than its target.
  std::vector<int> depth(n);
  std::vector<bool> done(n, false);
  std::function<int(int)> depth_of = [&](int i) -> int {
    if (done[i]) return depth[i];
    int d = fg[i]->depth();
    if (target[i] >= 0 &&
        std::get<RelativePlacement>(fg[i]->layout->position).relation == Relation::kOver) {
      d = std::max(d, depth_of(target[i]) + 1);
    }
    done[i] = true;
    return depth[i] = d;
  };

  std::map<int, GridSlot> out;
  for (int i = 0; i < n; ++i) {
    GridSlot slot;
    slot.row = rows[group[i]];
    slot.col = cols[group[i]];
    slot.depth = depth_of(i);
    slot.over = target[i] >= 0 &&
                std::get<RelativePlacement>(fg[i]->layout->position).relation == Relation::kOver;
    out[fg[i]->id] = slot;
  }
  return out;
}

}  // namespace provgen::planner
