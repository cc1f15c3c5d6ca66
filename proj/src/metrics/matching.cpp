#include <algorithm>
#include <cmath>
#include <set>

#include "cdrag/error.hpp"
#include "cdrag/metrics/metrics.hpp"

namespace cdrag::metrics {

namespace {

// Shortest augmenting path with potentials; requires rows <= cols.
std::vector<std::size_t> assign_wide(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  const std::size_t m = a.front().size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0);  // column -> row (1-based, 0 = free)
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, kUnassigned);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost) {
  if (cost.empty() || cost.front().empty()) return std::vector<std::size_t>(cost.size(), kUnassigned);
  const std::size_t rows = cost.size();
  const std::size_t cols = cost.front().size();
  for (const auto& row : cost) {
    if (row.size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged cost matrix");
    for (double c : row) {
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite cost");
    }
  }
  if (rows <= cols) return assign_wide(cost);

  std::vector<std::vector<double>> t(cols, std::vector<double>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t[j][i] = cost[i][j];
  }
  const auto col_to_row = assign_wide(t);
  std::vector<std::size_t> out(rows, kUnassigned);
  for (std::size_t j = 0; j < cols; ++j) out[col_to_row[j]] = j;
  return out;
}

Matching match_objects(std::span<const Trajectory> predicted,
                       std::span<const Trajectory> ground_truth, MatchMode mode) {
  if (predicted.empty() || ground_truth.empty()) {
    throw Error(ErrorCode::InvalidArgument, "matching needs tracks on both sides");
  }
  std::set<std::string> pred_ids;
  std::set<std::string> gt_ids;
  for (const Trajectory& t : predicted) pred_ids.insert(t.object_id);
  for (const Trajectory& t : ground_truth) gt_ids.insert(t.object_id);
  if (mode == MatchMode::Auto) mode = pred_ids == gt_ids ? MatchMode::Id : MatchMode::Spatial;

  Matching m;
  if (mode == MatchMode::Id) {
    for (const std::string& id : pred_ids) {
      if (gt_ids.contains(id)) {
        m.pairs.emplace_back(id, id);
      } else {
        m.unmatched_predicted.push_back(id);
      }
    }
    for (const std::string& id : gt_ids) {
      if (!pred_ids.contains(id)) m.unmatched_ground_truth.push_back(id);
    }
    return m;
  }

  std::vector<std::vector<double>> cost(predicted.size(),
                                        std::vector<double>(ground_truth.size(), 0.0));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < ground_truth.size(); ++j) {
      if (predicted[i].points.empty() || ground_truth[j].points.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty trajectory in matching");
      }
      cost[i][j] = distance(predicted[i].points.front(), ground_truth[j].points.front());
    }
  }
  const auto assignment = solve_assignment(cost);
  std::vector<bool> gt_used(ground_truth.size(), false);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (assignment[i] == kUnassigned) {
      m.unmatched_predicted.push_back(predicted[i].object_id);
    } else {
      gt_used[assignment[i]] = true;
      m.pairs.emplace_back(predicted[i].object_id, ground_truth[assignment[i]].object_id);
    }
  }
  for (std::size_t j = 0; j < ground_truth.size(); ++j) {
    if (!gt_used[j]) m.unmatched_ground_truth.push_back(ground_truth[j].object_id);
  }
  std::sort(m.pairs.begin(), m.pairs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::sort(m.unmatched_predicted.begin(), m.unmatched_predicted.end());
  std::sort(m.unmatched_ground_truth.begin(), m.unmatched_ground_truth.end());
  return m;
}

}  // namespace cdrag::metrics
