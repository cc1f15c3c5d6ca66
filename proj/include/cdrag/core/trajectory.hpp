#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cdrag/core/geometry.hpp"

namespace cdrag {

/// Per-frame positions of one object; frame index is the position in `points`.
struct Trajectory {
  std::string object_id;
  std::vector<Point2> points;

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool all_finite() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct DragInput {
  Point2 start;
  Trajectory points;

  /// Builds a drag whose start is the first authored point. Throws on an empty path.
  static DragInput from_points(std::string object_id, std::vector<Point2> points);
};

/// Piecewise-linear resampling over the frame index to exactly `frames` points.
/// Endpoints are preserved; frames == t.size() returns t unchanged.
/// Throws Error(InvalidArgument) for frames == 0 or an empty trajectory.
Trajectory resample_trajectory(const Trajectory& t, std::size_t frames);

}  // namespace cdrag
