#include "cdrag/physics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cdrag/error.hpp"

namespace cdrag::physics {

namespace {

constexpr double kMinSeparation = 1e-12;
constexpr int kMaxSweeps = 100000;

// Approach speed along the a->b normal, positive when closing.
double approach_speed(const BodyState& a, const BodyState& b) {
  const Vec2 d = b.center - a.center;
  const double len = norm(d);
  if (len < kMinSeparation) {
    return 0.0;
  }
  return dot(a.velocity - b.velocity, d / len);
}

}  // namespace

BodyState body_from_object(const SceneObject& object, Vec2 velocity) {
  BodyState body;
  body.object_id = object.id;
  body.center = object.bbox.center();
  body.velocity = velocity;
  body.radius = std::min(object.bbox.width(), object.bbox.height()) / 2.0;
  body.mass = object.mass;
  return body;
}

std::pair<BodyState, BodyState> collide(const BodyState& a, const BodyState& b,
                                        double restitution) {
  if (!(restitution >= 0.0 && restitution <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "restitution must lie in [0, 1]");
  }
  const Vec2 d = b.center - a.center;
  const double len = norm(d);
  if (len < kMinSeparation) {
    throw Error(ErrorCode::DegenerateContact,
                "coincident centers for " + a.object_id + " and " + b.object_id);
  }
  if (len > a.radius + b.radius + kContactSlack) {
    throw Error(ErrorCode::InvalidArgument,
                a.object_id + " and " + b.object_id + " are not in contact");
  }
  const Vec2 n = d / len;
  const double closing = dot(a.velocity - b.velocity, n);
  if (closing <= 0.0) {
    return {a, b};
  }
  const double inv_a = 1.0 / a.mass;
  const double inv_b = 1.0 / b.mass;
  const double impulse = (1.0 + restitution) * closing / (inv_a + inv_b);
  BodyState out_a = a;
  BodyState out_b = b;
  out_a.velocity -= n * (impulse * inv_a);
  out_b.velocity += n * (impulse * inv_b);
  return {out_a, out_b};
}

int resolve_sequential(std::span<BodyState> bodies,
                       std::span<const std::pair<std::size_t, std::size_t>> pairs,
                       double restitution) {
  double scale = 0.0;
  for (const BodyState& b : bodies) {
    scale = std::max(scale, norm(b.velocity));
  }
  // Inelastic chains converge geometrically; stop once closing speeds are
  // negligible relative to the fastest body.
  const double eps = std::max(scale * 1e-13, std::numeric_limits<double>::min());
  int sweeps = 0;
  while (sweeps < kMaxSweeps) {
    ++sweeps;
    bool any = false;
    for (const auto& [i, j] : pairs) {
      if (approach_speed(bodies[i], bodies[j]) > eps) {
        auto [a, b] = collide(bodies[i], bodies[j], restitution);
        bodies[i] = std::move(a);
        bodies[j] = std::move(b);
        any = true;
      }
    }
    if (!any) {
      break;
    }
  }
  return sweeps;
}

std::vector<BodyState> propagate_chain(std::vector<BodyState> chain, Vec2 incoming_velocity,
                                       double restitution) {
  if (chain.size() < 2) {
    throw Error(ErrorCode::InvalidChain, "chain needs at least two bodies");
  }
  const Point2 head = chain.front().center;
  const Vec2 axis = chain.back().center - head;
  const double axis_len = norm(axis);
  if (axis_len < kMinSeparation) {
    throw Error(ErrorCode::InvalidChain, "chain endpoints coincide");
  }
  for (const BodyState& b : chain) {
    const double off = std::abs(cross(axis, b.center - head)) / axis_len;
    if (off > 1e-3) {
      throw Error(ErrorCode::InvalidChain, b.object_id + " is off the chain line");
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const double gap = distance(chain[i].center, chain[i + 1].center);
    if (gap > chain[i].radius + chain[i + 1].radius + kContactSlack) {
      throw Error(ErrorCode::InvalidChain,
                  chain[i].object_id + " does not touch " + chain[i + 1].object_id);
    }
    pairs.emplace_back(i, i + 1);
  }
  chain.front().velocity = incoming_velocity;
  resolve_sequential(chain, pairs, restitution);
  return chain;
}

Trajectory ballistic(Point2 start, Vec2 v0, Vec2 gravity, Vec2 extra_accel, std::size_t n) {
  return ballistic_until(start, v0, gravity, extra_accel, n, std::nullopt);
}

Trajectory ballistic_until(Point2 start, Vec2 v0, Vec2 gravity, Vec2 extra_accel, std::size_t n,
                           std::optional<double> rest_y) {
  Trajectory t;
  t.points.reserve(n);
  const Vec2 accel = gravity + extra_accel;
  bool resting = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (resting) {
      t.points.push_back(t.points.back());
      continue;
    }
    const double kk = static_cast<double>(k);
    Point2 p = start + v0 * kk + accel * (0.5 * kk * kk);
    if (rest_y && k > 0 && p.y >= *rest_y) {
      p.y = *rest_y;
      resting = true;
    }
    t.points.push_back(p);
  }
  return t;
}

Point2 lever_rotate(Point2 pivot, Point2 p, double dtheta) {
  const double c = std::cos(dtheta);
  const double s = std::sin(dtheta);
  const Vec2 d = p - pivot;
  return {pivot.x + d.x * c - d.y * s, pivot.y + d.x * s + d.y * c};
}

Point2 reflect_point(const Segment& mirror, Point2 p) {
  const Vec2 dir = mirror.b - mirror.a;
  const double len2 = dot(dir, dir);
  if (!(len2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mirror segment has zero length");
  }
  const Vec2 rel = p - mirror.a;
  const Point2 foot = mirror.a + dir * (dot(rel, dir) / len2);
  return foot * 2.0 - p;
}

Trajectory mirror_reflect(const Segment& mirror, const Trajectory& t) {
  Trajectory out{t.object_id, {}};
  out.points.reserve(t.points.size());
  for (const Point2& p : t.points) {
    out.points.push_back(reflect_point(mirror, p));
  }
  return out;
}

Vec2 frame_velocity(const Trajectory& t, std::size_t k) {
  if (t.points.size() < 2) {
    return {};
  }
  if (k == 0) {
    return t.points[1] - t.points[0];
  }
  return t.points[k] - t.points[k - 1];
}

std::vector<CollisionEvent> detect_collisions(
    std::span<const std::pair<BodyState, Trajectory>> bodies) {
  if (bodies.empty()) {
    return {};
  }
  const std::size_t frames = bodies.front().second.points.size();
  for (const auto& [body, traj] : bodies) {
    if (traj.points.size() != frames) {
      throw Error(ErrorCode::InvalidArgument, "trajectories must share one frame count");
    }
    if (!(body.radius > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, body.object_id + " has non-positive radius");
    }
  }

  // Index pairs with the lexicographically smaller id first.
  struct PairState {
    std::size_t first;
    std::size_t second;
    bool reported = false;
  };
  std::vector<PairState> pairs;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      if (bodies[i].first.object_id <= bodies[j].first.object_id) {
        pairs.push_back({i, j});
      } else {
        pairs.push_back({j, i});
      }
    }
  }

  std::vector<CollisionEvent> events;
  for (std::size_t k = 0; k < frames; ++k) {
    for (PairState& ps : pairs) {
      const auto& [ba, ta] = bodies[ps.first];
      const auto& [bb, tb] = bodies[ps.second];
      const Vec2 d = tb.points[k] - ta.points[k];
      const double dist = norm(d);
      if (dist > ba.radius + bb.radius) {
        ps.reported = false;  // episode over
        continue;
      }
      if (ps.reported || dist < kMinSeparation) {
        continue;
      }
      const Vec2 n = d / dist;
      const double rel = dot(frame_velocity(tb, k) - frame_velocity(ta, k), n);
      if (rel < 0.0) {
        events.push_back({static_cast<int>(k), {ba.object_id, bb.object_id}, n});
        ps.reported = true;
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const CollisionEvent& x, const CollisionEvent& y) {
    if (x.frame != y.frame) return x.frame < y.frame;
    return x.pair < y.pair;
  });
  return events;
}

}  // namespace cdrag::physics
