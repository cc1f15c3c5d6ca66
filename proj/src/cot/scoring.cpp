#include "cdrag/cot/scoring.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace cdrag::cot {

namespace {

std::vector<physics::BodyState> proxies(const CandidateBundle& bundle, const Scene& scene) {
  std::vector<physics::BodyState> out;
  out.reserve(bundle.trajectories.size());
  for (const Trajectory& t : bundle.trajectories) {
    const SceneObject* o = scene.find(t.object_id);
    physics::BodyState b;
    if (o != nullptr) {
      b = physics::body_from_object(*o);
    } else {
      b.object_id = t.object_id;
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

Vec2 incoming_velocity(const CandidateBundle& bundle, const Trajectory& t, std::size_t f) {
  if (f > 0) {
    return t.points[f] - t.points[f - 1];
  }
  const auto it = bundle.entry_velocities.find(t.object_id);
  return it == bundle.entry_velocities.end() ? Vec2{} : it->second;
}

std::vector<ScoreTerm> penetration_terms(const CandidateBundle& bundle, const Scene& scene) {
  std::vector<ScoreTerm> out;
  const auto bodies = proxies(bundle, scene);
  const std::size_t n = bundle.frame_count();
  const auto& ts = bundle.trajectories;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = i + 1; j < ts.size(); ++j) {
        const double depth =
            bodies[i].radius + bodies[j].radius - distance(ts[i].points[k], ts[j].points[k]);
        if (depth > 0.0) {
          out.push_back({static_cast<int>(k), ts[i].object_id, depth});
        }
      }
    }
  }
  return out;
}

std::vector<ScoreTerm> bounds_terms(const CandidateBundle& bundle, const Scene& scene) {
  std::vector<ScoreTerm> out;
  const BBox area = scene.statics.walls ? *scene.statics.walls : scene.bounds();
  for (const Trajectory& t : bundle.trajectories) {
    for (std::size_t k = 0; k < t.points.size(); ++k) {
      const Point2& p = t.points[k];
      const double dx = std::max({0.0, area.x1 - p.x, p.x - area.x2});
      const double dy = std::max({0.0, area.y1 - p.y, p.y - area.y2});
      const double excursion = std::hypot(dx, dy);
      if (excursion > 0.0) {
        out.push_back({static_cast<int>(k), t.object_id, excursion});
      }
    }
  }
  return out;
}

std::vector<ScoreTerm> momentum_terms(const CandidateBundle& bundle, const Scene& scene) {
  std::vector<ScoreTerm> out;
  const std::size_t n = bundle.frame_count();
  const auto bodies = proxies(bundle, scene);
  const auto& ts = bundle.trajectories;

  std::map<int, std::set<std::string>> seeds;
  for (const RecordedCollision& c : bundle.collisions) {
    if (!c.closed) continue;
    seeds[c.event.frame].insert(c.event.pair.first);
    seeds[c.event.frame].insert(c.event.pair.second);
  }

  for (const auto& [frame, ids] : seeds) {
    const auto f = static_cast<std::size_t>(frame);
    if (f + 1 >= n) continue;  // no frame after the impact to measure

    std::vector<std::size_t> parent(ts.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = i + 1; j < ts.size(); ++j) {
        const double reach = bodies[i].radius + bodies[j].radius + physics::kContactSlack;
        if (distance(ts[i].points[f], ts[j].points[f]) <= reach) {
          parent[find_root(parent, i)] = find_root(parent, j);
        }
      }
    }
    std::set<std::size_t> done;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!ids.contains(ts[i].object_id)) continue;
      const std::size_t root = find_root(parent, i);
      if (!done.insert(root).second) continue;

      Vec2 before;
      Vec2 after;
      std::string first_id;
      for (std::size_t m = 0; m < ts.size(); ++m) {
        if (find_root(parent, m) != root) continue;
        if (first_id.empty()) first_id = ts[m].object_id;
        const double mass = bodies[m].mass;
        before += incoming_velocity(bundle, ts[m], f) * mass;
        after += (ts[m].points[f + 1] - ts[m].points[f]) * mass;
      }
      const double scale = std::max(norm(before), norm(after));
      const double residual = scale > 0.0 ? norm(after - before) / scale : 0.0;
      out.push_back({frame, first_id, residual});
    }
  }
  return out;
}

double smoothness_term(const CandidateBundle& bundle) {
  double total = 0.0;
  for (const MotionSegment& s : bundle.segments) {
    if (s.kind == MotionKind::Ballistic) continue;
    const Trajectory* t = bundle.find(s.object_id);
    if (t == nullptr) continue;
    const int last = std::min<int>(s.last_frame, static_cast<int>(t->points.size()) - 1);
    for (int k = s.first_frame + 1; k < last; ++k) {
      const auto& p = t->points;
      total += norm(p[k + 1] - p[k] * 2.0 + p[k - 1]);
    }
  }
  return total;
}

ScoreBreakdown score_bundle(const CandidateBundle& bundle, const Scene& scene,
                            const ScoreWeights& weights) {
  const auto sum = [](const std::vector<ScoreTerm>& terms) {
    double s = 0.0;
    for (const ScoreTerm& t : terms) s += t.value;
    return s;
  };
  ScoreBreakdown b;
  b.penetration = sum(penetration_terms(bundle, scene));
  b.bounds = sum(bounds_terms(bundle, scene));
  b.momentum = sum(momentum_terms(bundle, scene));
  b.smoothness = smoothness_term(bundle);
  b.total = weights.penetration * b.penetration + weights.bounds * b.bounds +
            weights.momentum * b.momentum + weights.smoothness * b.smoothness;
  return b;
}

}  // namespace cdrag::cot
