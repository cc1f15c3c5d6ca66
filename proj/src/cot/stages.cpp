#include "cdrag/cot/stages.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>

#include "cdrag/cot/scoring.hpp"
#include "cdrag/error.hpp"

namespace cdrag::cot {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<SceneObject> sorted_objects(const ObjectInventory& inventory) {
  auto all = inventory.all();
  std::sort(all.begin(), all.end(),
            [](const SceneObject& a, const SceneObject& b) { return a.id < b.id; });
  return all;
}

// ---------------------------------------------------------------------------
// S2 geometry helpers

BBox reflect_box(const Segment& mirror, const BBox& b) {
  const std::array<Point2, 4> corners{Point2{b.x1, b.y1}, Point2{b.x2, b.y1},
                                      Point2{b.x1, b.y2}, Point2{b.x2, b.y2}};
  BBox out{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const Point2& c : corners) {
    const Point2 r = physics::reflect_point(mirror, c);
    out.x1 = std::min(out.x1, r.x);
    out.y1 = std::min(out.y1, r.y);
    out.x2 = std::max(out.x2, r.x);
    out.y2 = std::max(out.y2, r.y);
  }
  return out;
}

bool corners_match(const BBox& a, const BBox& b, double tol) {
  return distance({a.x1, a.y1}, {b.x1, b.y1}) <= tol &&
         distance({a.x2, a.y1}, {b.x2, b.y1}) <= tol &&
         distance({a.x1, a.y2}, {b.x1, b.y2}) <= tol &&
         distance({a.x2, a.y2}, {b.x2, b.y2}) <= tol;
}

bool rests_on(const BBox& top, const BBox& bottom) {
  const double overlap = std::min(top.x2, bottom.x2) - std::max(top.x1, bottom.x1);
  return overlap > 0.0 && std::abs(top.y2 - bottom.y1) <= kSupportTolerance;
}

// ---------------------------------------------------------------------------
// S3 simulation state

struct SimBody {
  physics::BodyState proxy;
  std::vector<Point2> path;
  Vec2 velocity;
  bool driven = false;
  std::vector<std::pair<int, MotionKind>> starts;
};

struct Simulation {
  std::vector<SimBody> bodies;  // id order
  std::size_t controlled = 0;
  std::vector<RecordedCollision> collisions;
};

Simulation make_simulation(const ObjectInventory& inventory, const Trajectory& driven) {
  Simulation sim;
  const std::size_t n = driven.points.size();
  for (const SceneObject& o : sorted_objects(inventory)) {
    const bool is_controlled = o.id == inventory.controlled.id;
    if (!o.mobile && !is_controlled) continue;
    SimBody b;
    b.proxy = physics::body_from_object(o);
    if (is_controlled) {
      sim.controlled = sim.bodies.size();
      b.path = driven.points;
      b.driven = true;
      b.starts.emplace_back(0, MotionKind::Driven);
    } else {
      b.path.assign(n, b.proxy.center);
      b.starts.emplace_back(0, MotionKind::Stationary);
    }
    sim.bodies.push_back(std::move(b));
  }
  return sim;
}

std::vector<std::pair<physics::BodyState, Trajectory>> planned(const Simulation& sim) {
  std::vector<std::pair<physics::BodyState, Trajectory>> out;
  out.reserve(sim.bodies.size());
  for (const SimBody& b : sim.bodies) {
    out.emplace_back(b.proxy, Trajectory{b.proxy.object_id, b.path});
  }
  return out;
}

std::size_t body_index(const Simulation& sim, const std::string& id) {
  for (std::size_t i = 0; i < sim.bodies.size(); ++i) {
    if (sim.bodies[i].proxy.object_id == id) return i;
  }
  return sim.bodies.size();
}

std::size_t root_of(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

// Free bodies exchange impulses; the controlled body follows the drag until
// its first contact and moves freely afterwards. Gravity is off.
void simulate_collision_chain(Simulation& sim, const Trajectory& driven, double restitution,
                              double multiplier) {
  const std::size_t n = driven.points.size();
  int resolved = -1;
  while (true) {
    const auto plan = planned(sim);
    const auto events = physics::detect_collisions(plan);
    std::vector<physics::CollisionEvent> batch;
    for (const auto& ev : events) {
      if (ev.frame <= resolved) continue;
      if (!batch.empty() && ev.frame != batch.front().frame) break;
      batch.push_back(ev);
    }
    if (batch.empty()) break;
    const int frame = batch.front().frame;
    const auto f = static_cast<std::size_t>(frame);

    const std::size_t count = sim.bodies.size();
    std::vector<Vec2> v_in(count);
    for (std::size_t i = 0; i < count; ++i) {
      const SimBody& b = sim.bodies[i];
      v_in[i] = b.driven ? physics::frame_velocity(driven, f) : b.velocity;
    }

    // Group bodies that touch at this frame, transitively.
    std::vector<std::size_t> parent(count);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto touching = [&](std::size_t i, std::size_t j) {
      const auto& a = sim.bodies[i];
      const auto& b = sim.bodies[j];
      return distance(a.path[f], b.path[f]) <=
             a.proxy.radius + b.proxy.radius + physics::kContactSlack;
    };
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) {
        if (touching(i, j)) parent[root_of(parent, i)] = root_of(parent, j);
      }
    }

    std::set<std::size_t> handled;
    for (const auto& ev : batch) {
      const std::size_t ia = body_index(sim, ev.pair.first);
      const std::size_t ib = body_index(sim, ev.pair.second);
      const std::size_t root = root_of(parent, ia);
      if (!handled.insert(root).second) continue;

      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < count; ++i) {
        if (root_of(parent, i) == root) members.push_back(i);
      }
      // Front-to-back order along the striking direction.
      Vec2 dir = v_in[ia] - v_in[ib];
      if (norm(dir) == 0.0) dir = ev.normal;
      dir = dir / norm(dir);
      std::map<std::size_t, double> key;
      for (std::size_t m : members) key[m] = dot(sim.bodies[m].path[f], dir);

      std::vector<physics::BodyState> states;
      std::map<std::size_t, std::size_t> local;
      for (std::size_t m : members) {
        local[m] = states.size();
        physics::BodyState s = sim.bodies[m].proxy;
        s.center = sim.bodies[m].path[f];
        s.velocity = v_in[m];
        states.push_back(std::move(s));
      }
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t x = 0; x < members.size(); ++x) {
        for (std::size_t y = x + 1; y < members.size(); ++y) {
          std::size_t i = members[x];
          std::size_t j = members[y];
          if (!touching(i, j)) continue;
          if (key[j] < key[i]) std::swap(i, j);
          pairs.emplace_back(i, j);
        }
      }
      std::sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
        if (key[p.first] != key[q.first]) return key[p.first] < key[q.first];
        if (key[p.second] != key[q.second]) return key[p.second] < key[q.second];
        return p < q;
      });
      for (auto& [i, j] : pairs) {
        i = local[i];
        j = local[j];
      }
      physics::resolve_sequential(states, pairs, restitution);

      for (std::size_t m : members) {
        SimBody& b = sim.bodies[m];
        Vec2 v_new = states[local[m]].velocity;
        if (m != sim.controlled) v_new = v_in[m] + (v_new - v_in[m]) * multiplier;
        if (!b.driven && v_new == v_in[m]) continue;
        b.driven = false;
        b.velocity = v_new;
        for (std::size_t k = f + 1; k < n; ++k) {
          b.path[k] = b.path[f] + v_new * static_cast<double>(k - f);
        }
        b.starts.emplace_back(frame, MotionKind::Ballistic);
      }
    }
    for (const auto& ev : batch) sim.collisions.push_back({ev, true});
    resolved = frame;
  }
}

// The controlled body is driven for the whole clip; whatever it strikes is
// launched along the drag's final velocity and flies under gravity.
void simulate_gravity_force(Simulation& sim, const Trajectory& driven,
                            const SceneUnderstanding& u, const Scene& scene, double multiplier) {
  const std::size_t n = driven.points.size();
  const Vec2 v_end = driven.points[n - 1] - driven.points[n - 2];
  const SimBody& ctrl = sim.bodies[sim.controlled];
  const double m_c = ctrl.proxy.mass;
  const std::string ctrl_id = ctrl.proxy.object_id;

  const auto plan = planned(sim);
  std::set<std::size_t> launched;
  for (const auto& ev : physics::detect_collisions(plan)) {
    if (ev.pair.first != ctrl_id && ev.pair.second != ctrl_id) continue;
    const std::string& other = ev.pair.first == ctrl_id ? ev.pair.second : ev.pair.first;
    const std::size_t s = body_index(sim, other);
    if (!launched.insert(s).second) continue;

    SimBody& b = sim.bodies[s];
    const auto f = static_cast<std::size_t>(ev.frame);
    const double factor = multiplier * (1.0 + u.restitution) * m_c / (m_c + b.proxy.mass);
    const Vec2 v0 = v_end * factor;
    std::optional<double> rest_y;
    if (scene.statics.ground) rest_y = *scene.statics.ground - b.proxy.radius;
    const Trajectory flight = physics::ballistic_until(b.path[f], v0, u.gravity, {}, n - f, rest_y);
    std::copy(flight.points.begin(), flight.points.end(),
              b.path.begin() + static_cast<std::ptrdiff_t>(f));
    b.velocity = v0;
    b.starts.emplace_back(ev.frame, MotionKind::Ballistic);
    sim.collisions.push_back({ev, false});
  }
}

// Mirror partners copy the reflected drag; lever partners turn rigidly
// about the shared pivot by the controlled end's angular sweep.
void simulate_lever_mirror(Simulation& sim, const Trajectory& driven, const RelationGraph& graph,
                           const Scene& scene) {
  const std::size_t n = driven.points.size();
  const std::string ctrl_id = sim.bodies[sim.controlled].proxy.object_id;
  std::set<std::size_t> coupled;
  for (const RelationEdge& e : graph.edges_of(ctrl_id)) {
    if (e.type != EdgeType::MirrorPair && e.type != EdgeType::LeverCoupled) continue;
    const std::string& other = e.from == ctrl_id ? e.to : e.from;
    const std::size_t s = body_index(sim, other);
    if (s == sim.bodies.size() || !coupled.insert(s).second) continue;
    SimBody& b = sim.bodies[s];

    if (e.type == EdgeType::MirrorPair) {
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= scene.statics.mirrors.size()) continue;
      b.path = physics::mirror_reflect(scene.statics.mirrors[e.index], driven).points;
    } else {
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= scene.statics.pivots.size()) continue;
      const Point2 pivot = scene.statics.pivots[e.index];
      const Point2 anchor = b.proxy.center;
      double prev = std::atan2(driven.points[0].y - pivot.y, driven.points[0].x - pivot.x);
      double sweep = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const Vec2 d = driven.points[k] - pivot;
        const double angle = std::atan2(d.y, d.x);
        double step = angle - prev;
        while (step > std::numbers::pi) step -= 2.0 * std::numbers::pi;
        while (step <= -std::numbers::pi) step += 2.0 * std::numbers::pi;
        sweep += step;
        prev = angle;
        b.path[k] = physics::lever_rotate(pivot, anchor, sweep);
      }
    }
    b.starts = {{0, MotionKind::Coupled}};
  }
}

CandidateBundle to_bundle(const Simulation& sim, const Trajectory& driven, int provenance,
                          double multiplier) {
  CandidateBundle bundle;
  bundle.provenance = provenance;
  bundle.multiplier = multiplier;
  const int last = static_cast<int>(driven.points.size()) - 1;
  for (const SimBody& b : sim.bodies) {
    bundle.trajectories.push_back({b.proxy.object_id, b.path});
    for (std::size_t i = 0; i < b.starts.size(); ++i) {
      const int first = b.starts[i].first;
      const int end = i + 1 < b.starts.size() ? b.starts[i + 1].first : last;
      bundle.segments.push_back({b.proxy.object_id, first, end, b.starts[i].second});
    }
  }
  bundle.controlled_id = sim.bodies[sim.controlled].proxy.object_id;
  bundle.collisions = sim.collisions;
  bundle.entry_velocities[bundle.controlled_id] = physics::frame_velocity(driven, 0);
  return bundle;
}

}  // namespace

// ---------------------------------------------------------------------------
// S1

SceneUnderstanding stage1_understand(const ObjectInventory& inventory, const Scene& scene) {
  SceneUnderstanding u;
  if (scene.scene_category) {
    u.scene_label = *scene.scene_category;
  } else {
    std::map<std::string, int> counts;
    for (const SceneObject& o : inventory.all()) ++counts[o.category];
    int best = -1;
    for (const auto& [category, c] : counts) {
      if (c > best) {
        best = c;
        u.scene_label = category;
      }
    }
  }

  const bool has_gravity = scene.gravity.x != 0.0 || scene.gravity.y != 0.0;
  if (!scene.statics.mirrors.empty() || !scene.statics.pivots.empty()) {
    u.interaction_type = InteractionType::LeverMirror;
  } else if (has_gravity || scene.statics.ground) {
    u.interaction_type = InteractionType::GravityForce;
  } else {
    u.interaction_type = InteractionType::CollisionChain;
  }

  u.gravity = scene.gravity;
  if (u.interaction_type == InteractionType::GravityForce && !has_gravity) {
    u.gravity = {0.0, kDefaultGravity};
  }
  u.gravity_active = u.interaction_type == InteractionType::GravityForce || has_gravity;

  if (scene.restitution) {
    u.restitution = *scene.restitution;
  } else {
    u.restitution = lower(u.scene_label) == "traffic" ? 0.6 : 1.0;
  }

  switch (u.interaction_type) {
    case InteractionType::CollisionChain:
      u.rule_set = {"impulse-exchange", "momentum-conservation", "non-penetration", "in-bounds"};
      break;
    case InteractionType::GravityForce:
      u.rule_set = {"drag-impulse", "ballistic-flight", "ground-rest", "non-penetration",
                    "in-bounds"};
      break;
    case InteractionType::LeverMirror:
      if (!scene.statics.mirrors.empty()) u.rule_set.push_back("mirror-symmetry");
      if (!scene.statics.pivots.empty()) u.rule_set.push_back("lever-rigid-rotation");
      u.rule_set.push_back("in-bounds");
      break;
  }
  return u;
}

// ---------------------------------------------------------------------------
// S2

RelationGraph stage2_relations(const SceneUnderstanding& /*understanding*/,
                               const ObjectInventory& inventory, const Scene& scene) {
  RelationGraph g;
  const auto objects = sorted_objects(inventory);
  for (const SceneObject& o : objects) g.nodes.push_back(o.id);

  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = i + 1; j < objects.size(); ++j) {
      const SceneObject& a = objects[i];
      const SceneObject& b = objects[j];
      const double gap = box_gap(a.bbox, b.bbox);
      const double mean_width = (a.bbox.width() + b.bbox.width()) / 2.0;
      if (gap <= kContactGap) {
        g.edges.push_back({EdgeType::Contact, a.id, b.id, -1});
      } else if (gap <= kAdjacentFraction * mean_width) {
        g.edges.push_back({EdgeType::Adjacent, a.id, b.id, -1});
      }
      if (rests_on(a.bbox, b.bbox)) g.edges.push_back({EdgeType::Supports, b.id, a.id, -1});
      if (rests_on(b.bbox, a.bbox)) g.edges.push_back({EdgeType::Supports, a.id, b.id, -1});

      if (a.category == b.category) {
        for (std::size_t m = 0; m < scene.statics.mirrors.size(); ++m) {
          const Segment& mirror = scene.statics.mirrors[m];
          if (mirror.length() == 0.0) continue;
          if (corners_match(reflect_box(mirror, a.bbox), b.bbox, kMirrorCornerTolerance) &&
              corners_match(reflect_box(mirror, b.bbox), a.bbox, kMirrorCornerTolerance)) {
            g.edges.push_back({EdgeType::MirrorPair, a.id, b.id, static_cast<int>(m)});
          }
        }
      }
      for (std::size_t p = 0; p < scene.statics.pivots.size(); ++p) {
        const Point2 pivot = scene.statics.pivots[p];
        const Vec2 da = a.bbox.center() - pivot;
        const Vec2 db = b.bbox.center() - pivot;
        const double arm = std::min(norm(da), norm(db));
        if (arm > 0.0 && std::max(norm(da), norm(db)) <= kLeverArmRatio * arm &&
            dot(da, db) < 0.0) {
          g.edges.push_back({EdgeType::LeverCoupled, a.id, b.id, static_cast<int>(p)});
        }
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const RelationEdge& x, const RelationEdge& y) {
    return std::tie(x.type, x.from, x.to, x.index) < std::tie(y.type, y.from, y.to, y.index);
  });
  return g;
}

// ---------------------------------------------------------------------------
// S3

CandidateSet stage3_interactions(const RelationGraph& graph,
                                 const SceneUnderstanding& understanding, const DragInput& drag,
                                 const ObjectInventory& inventory, const Scene& scene,
                                 const PipelineConfig& cfg, int iteration) {
  cfg.validate();
  if (!inventory.controlled.bbox.contains(drag.start)) {
    throw Error(ErrorCode::InvalidDrag, "drag does not start on " + inventory.controlled.id);
  }
  Trajectory driven = resample_trajectory(drag.points, static_cast<std::size_t>(cfg.frame_count));
  driven.object_id = inventory.controlled.id;

  CandidateSet out;
  for (int c = 0; c < cfg.k; ++c) {
    const int provenance = iteration * cfg.k + c;
    const double multiplier = candidate_multiplier(cfg.rng_seed, static_cast<std::size_t>(provenance));
    Simulation sim = make_simulation(inventory, driven);
    switch (understanding.interaction_type) {
      case InteractionType::CollisionChain:
        simulate_collision_chain(sim, driven, understanding.restitution, multiplier);
        break;
      case InteractionType::GravityForce:
        simulate_gravity_force(sim, driven, understanding, scene, multiplier);
        break;
      case InteractionType::LeverMirror:
        simulate_lever_mirror(sim, driven, graph, scene);
        break;
    }
    out.bundles.push_back(to_bundle(sim, driven, provenance, multiplier));
  }
  return out;
}

// ---------------------------------------------------------------------------
// S4

CandidateSet score_candidates(const CandidateSet& candidates, const Scene& scene,
                              const PipelineConfig& cfg) {
  CandidateSet scored = candidates;
  for (CandidateBundle& b : scored.bundles) {
    b.breakdown = score_bundle(b, scene, cfg.weights);
    b.score = b.breakdown.total;
  }
  return scored;
}

const CandidateBundle& select_best(std::span<const CandidateBundle> bundles) {
  if (bundles.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no candidates to rank");
  }
  const CandidateBundle* best = &bundles.front();
  for (const CandidateBundle& b : bundles.subspan(1)) {
    if (b.score < best->score || (b.score == best->score && b.provenance < best->provenance)) {
      best = &b;
    }
  }
  return *best;
}

CandidateBundle stage4_rank(const CandidateSet& candidates, const Scene& scene,
                            const PipelineConfig& cfg) {
  if (candidates.bundles.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no candidates to rank");
  }
  const CandidateSet scored = score_candidates(candidates, scene, cfg);
  return select_best(scored.bundles);
}

// ---------------------------------------------------------------------------
// S5

namespace {

constexpr double kPenetrationLimit = 1.0;   // px
constexpr double kMomentumLimit = 1e-6;     // relative
constexpr double kMirrorLimit = 1.0;        // px

Trajectory reconstruct_drag(const CandidateBundle& bundle, const Trajectory& controlled) {
  Trajectory rec = controlled;
  const std::size_t n = controlled.points.size();
  for (const RecordedCollision& c : bundle.collisions) {
    if (!c.closed) continue;
    if (c.event.pair.first != controlled.object_id && c.event.pair.second != controlled.object_id) {
      continue;
    }
    const auto f = static_cast<std::size_t>(c.event.frame);
    if (f + 1 >= n) continue;
    // Put back the velocity the controlled body gave away at the impact.
    const Vec2 lost = incoming_velocity(bundle, controlled, f) -
                      (controlled.points[f + 1] - controlled.points[f]);
    for (std::size_t k = f + 1; k < n; ++k) {
      rec.points[k] += lost * static_cast<double>(k - f);
    }
  }
  return rec;
}

}  // namespace

ValidationReport stage5_validate(const CandidateBundle& best, const DragInput& drag,
                                 const SceneUnderstanding& /*understanding*/,
                                 const RelationGraph& graph, const Scene& scene,
                                 const PipelineConfig& cfg) {
  ValidationReport report;
  for (const ScoreTerm& t : penetration_terms(best, scene)) {
    if (t.value > kPenetrationLimit) {
      report.forward_violations.push_back({"penetration", t.frame, t.object_id, t.value});
    }
  }
  for (const ScoreTerm& t : bounds_terms(best, scene)) {
    report.forward_violations.push_back({"bounds", t.frame, t.object_id, t.value});
  }
  for (const ScoreTerm& t : momentum_terms(best, scene)) {
    if (t.value > kMomentumLimit) {
      report.forward_violations.push_back({"momentum", t.frame, t.object_id, t.value});
    }
  }

  const Trajectory* controlled = best.find(best.controlled_id);
  if (controlled != nullptr) {
    for (const RelationEdge& e : graph.edges_of(best.controlled_id)) {
      if (e.type != EdgeType::MirrorPair || e.index < 0 ||
          static_cast<std::size_t>(e.index) >= scene.statics.mirrors.size()) {
        continue;
      }
      const std::string& other = e.from == best.controlled_id ? e.to : e.from;
      const Trajectory* partner = best.find(other);
      if (partner == nullptr) continue;
      const Segment& mirror = scene.statics.mirrors[e.index];
      const std::size_t n = std::min(controlled->points.size(), partner->points.size());
      for (std::size_t k = 0; k < n; ++k) {
        const double gap =
            distance(physics::reflect_point(mirror, controlled->points[k]), partner->points[k]);
        if (gap > kMirrorLimit) {
          report.forward_violations.push_back(
              {"mirror-asymmetry", static_cast<int>(k), other, gap});
        }
      }
    }

    const Trajectory rec = resample_trajectory(reconstruct_drag(best, *controlled),
                                               drag.points.points.size());
    double total = 0.0;
    for (std::size_t k = 0; k < rec.points.size(); ++k) {
      total += distance(rec.points[k], drag.points.points[k]);
    }
    report.backward_error = total / static_cast<double>(rec.points.size());
  } else {
    report.backward_error = INFINITY;
  }

  report.passed = report.forward_violations.empty() && report.backward_error <= cfg.tau;
  report.iterations_used = cfg.k > 0 ? best.provenance / cfg.k + 1 : 1;
  return report;
}

}  // namespace cdrag::cot
