#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdrag/core/geometry.hpp"
#include "cdrag/core/scene.hpp"
#include "cdrag/core/trajectory.hpp"

namespace cdrag::physics {

/// Circle proxy of a scene object used by every collision rule.
struct BodyState {
  std::string object_id;
  Point2 center;
  Vec2 velocity;
  double radius = 1.0;
  double mass = 1.0;
};

/// Circle proxy: center of the bbox, radius half the shorter bbox side.
BodyState body_from_object(const SceneObject& object, Vec2 velocity = {});

struct CollisionEvent {
  int frame = 0;
  std::pair<std::string, std::string> pair;
  Vec2 normal;  // unit, from pair.first toward pair.second

  friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

inline constexpr double kContactSlack = 1e-6;

/// Impulse exchange along the line of centers. Positions are untouched and
/// tangential velocity is preserved. A separating pair is returned unchanged.
/// Throws Error(DegenerateContact) for coincident centers and
/// Error(InvalidArgument) when the bodies are not touching or e is outside [0, 1].
std::pair<BodyState, BodyState> collide(const BodyState& a, const BodyState& b, double restitution);

/// Sequential pairwise resolution: sweeps `pairs` (indices into `bodies`) in
/// order, colliding every approaching pair, until none approach. Returns the
/// number of sweeps performed.
int resolve_sequential(std::span<BodyState> bodies,
                       std::span<const std::pair<std::size_t, std::size_t>> pairs,
                       double restitution);

/// Newton's-cradle style chain: the head receives `incoming_velocity` and
/// impulses travel front to back. Throws Error(InvalidChain) when the chain is
/// shorter than two, not collinear within 1e-3 px, or has a gap.
std::vector<BodyState> propagate_chain(std::vector<BodyState> chain, Vec2 incoming_velocity,
                                       double restitution);

/// Closed-form point k = start + v0*k + (gravity + extra)*k^2/2 for k in [0, n).
Trajectory ballistic(Point2 start, Vec2 v0, Vec2 gravity, Vec2 extra_accel, std::size_t n);

/// ballistic() that comes to rest once the body's center reaches `rest_y`
/// (the ground line minus the body radius); later frames hold that point.
Trajectory ballistic_until(Point2 start, Vec2 v0, Vec2 gravity, Vec2 extra_accel, std::size_t n,
                           std::optional<double> rest_y);

/// Rotation of p about pivot; positive angles turn clockwise on screen (y down).
Point2 lever_rotate(Point2 pivot, Point2 p, double dtheta);

/// Reflection of a point about the infinite line through the segment.
Point2 reflect_point(const Segment& mirror, Point2 p);
Trajectory mirror_reflect(const Segment& mirror, const Trajectory& t);

/// Per-frame contact sweep. A pair reports once per contact episode, at the
/// first frame in which the centers are within r_a + r_b and approaching.
/// Velocity at frame k is p(k) - p(k-1), or p(1) - p(0) at k = 0.
std::vector<CollisionEvent> detect_collisions(
    std::span<const std::pair<BodyState, Trajectory>> bodies);

/// Velocity of frame k as used by detect_collisions.
Vec2 frame_velocity(const Trajectory& t, std::size_t k);

}  // namespace cdrag::physics
