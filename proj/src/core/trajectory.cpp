#include "cdrag/core/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cdrag/error.hpp"

namespace cdrag {

bool Trajectory::all_finite() const {
  return std::all_of(points.begin(), points.end(), [](const Point2& p) { return is_finite(p); });
}

DragInput DragInput::from_points(std::string object_id, std::vector<Point2> points) {
  if (points.empty()) {
    throw Error(ErrorCode::InvalidArgument, "drag needs at least one point");
  }
  DragInput drag;
  drag.start = points.front();
  drag.points = Trajectory{std::move(object_id), std::move(points)};
  return drag;
}

Trajectory resample_trajectory(const Trajectory& t, std::size_t frames) {
  if (frames == 0) {
    throw Error(ErrorCode::InvalidArgument, "resample needs at least one frame");
  }
  if (t.points.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot resample an empty trajectory");
  }
  if (frames == t.points.size()) {
    return t;
  }
  Trajectory out{t.object_id, {}};
  out.points.reserve(frames);
  const std::size_t last = t.points.size() - 1;
  if (frames == 1 || last == 0) {
    out.points.assign(frames, t.points.front());
    if (frames > 1) {
      out.points.back() = t.points.back();
    }
    return out;
  }
  for (std::size_t i = 0; i < frames; ++i) {
    if (i == frames - 1) {
      out.points.push_back(t.points.back());
      continue;
    }
    const double s = static_cast<double>(i) * static_cast<double>(last) /
                     static_cast<double>(frames - 1);
    const auto k = std::min(static_cast<std::size_t>(std::floor(s)), last - 1);
    const double f = s - static_cast<double>(k);
    const Point2& a = t.points[k];
    const Point2& b = t.points[k + 1];
    out.points.push_back(f == 0.0 ? a : a + (b - a) * f);
  }
  return out;
}

}  // namespace cdrag
