#include "cdrag/cot/types.hpp"

#include <array>
#include <random>

#include "cdrag/error.hpp"

namespace cdrag::cot {

std::string_view to_string(EdgeType type) {
  switch (type) {
    case EdgeType::Contact: return "Contact";
    case EdgeType::Adjacent: return "Adjacent";
    case EdgeType::Supports: return "Supports";
    case EdgeType::MirrorPair: return "MirrorPair";
    case EdgeType::LeverCoupled: return "LeverCoupled";
  }
  return "Contact";
}

std::string_view to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::Driven: return "driven";
    case MotionKind::Stationary: return "stationary";
    case MotionKind::Ballistic: return "ballistic";
    case MotionKind::Coupled: return "coupled";
  }
  return "stationary";
}

std::vector<RelationEdge> RelationGraph::edges_of(std::string_view id) const {
  std::vector<RelationEdge> out;
  for (const RelationEdge& e : edges) {
    if (e.from == id || e.to == id) out.push_back(e);
  }
  return out;
}

const Trajectory* CandidateBundle::find(std::string_view id) const {
  for (const Trajectory& t : trajectories) {
    if (t.object_id == id) return &t;
  }
  return nullptr;
}

void PipelineConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be > 0");
  if (frame_count < 2) throw Error(ErrorCode::InvalidArgument, "frame_count must be >= 2");
  const std::array<double, 4> w{weights.penetration, weights.bounds, weights.momentum,
                                weights.smoothness};
  for (double v : w) {
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "score weights must be >= 0");
  }
}

double candidate_multiplier(std::uint64_t seed, std::size_t index) {
  static constexpr std::array<double, 5> kTable{1.0, 0.9, 1.1, 0.8, 1.2};
  if (index < kTable.size()) {
    return kTable[index];
  }
  // mt19937_64 output is fixed by the standard; distributions are not, so
  // map raw bits to [0, 1) by hand.
  std::mt19937_64 gen(seed);
  gen.discard(index - kTable.size());
  const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return 0.7 + 0.6 * unit;
}

Json to_json(const SceneUnderstanding& u) {
  return Json{{"scene_label", u.scene_label},
              {"interaction_type", to_string(u.interaction_type)},
              {"gravity_active", u.gravity_active},
              {"rule_set", u.rule_set},
              {"gravity", u.gravity},
              {"restitution", u.restitution}};
}

Json to_json(const RelationGraph& g) {
  Json edges = Json::array();
  for (const RelationEdge& e : g.edges) {
    Json je{{"type", to_string(e.type)}, {"from", e.from}, {"to", e.to}};
    if (e.index >= 0) je["index"] = e.index;
    edges.push_back(std::move(je));
  }
  return Json{{"nodes", g.nodes}, {"edges", edges}};
}

Json to_json(const ScoreBreakdown& s) {
  return Json{{"penetration", s.penetration},
              {"bounds", s.bounds},
              {"momentum", s.momentum},
              {"smoothness", s.smoothness},
              {"total", s.total}};
}

Json to_json(const CandidateBundle& b) {
  Json segments = Json::array();
  for (const MotionSegment& s : b.segments) {
    segments.push_back(Json{{"object_id", s.object_id},
                            {"first_frame", s.first_frame},
                            {"last_frame", s.last_frame},
                            {"kind", to_string(s.kind)}});
  }
  Json collisions = Json::array();
  for (const RecordedCollision& c : b.collisions) {
    collisions.push_back(Json{{"frame", c.event.frame},
                              {"pair", Json::array({c.event.pair.first, c.event.pair.second})},
                              {"normal", c.event.normal},
                              {"closed", c.closed}});
  }
  Json entry = Json::object();
  for (const auto& [id, v] : b.entry_velocities) entry[id] = v;
  return Json{{"provenance", b.provenance},   {"multiplier", b.multiplier},
              {"score", b.score},             {"breakdown", to_json(b.breakdown)},
              {"controlled_id", b.controlled_id},
              {"trajectories", b.trajectories}, {"segments", segments},
              {"collisions", collisions},     {"entry_velocities", entry}};
}

Json to_json(const CandidateSet& cs) {
  Json out = Json::array();
  for (const CandidateBundle& b : cs.bundles) out.push_back(to_json(b));
  return out;
}

Json to_json(const ValidationReport& r) {
  Json violations = Json::array();
  for (const ForwardViolation& v : r.forward_violations) {
    violations.push_back(Json{{"rule", v.rule},
                              {"frame", v.frame},
                              {"object_id", v.object_id},
                              {"magnitude", v.magnitude}});
  }
  return Json{{"forward_violations", violations},
              {"backward_error", r.backward_error},
              {"passed", r.passed},
              {"iterations_used", r.iterations_used}};
}

Json to_json(const PipelineConfig& cfg) {
  return Json{{"k", cfg.k},
              {"max_iterations", cfg.max_iterations},
              {"tau", cfg.tau},
              {"frame_count", cfg.frame_count},
              {"rng_seed", cfg.rng_seed},
              {"weights", Json{{"penetration", cfg.weights.penetration},
                               {"bounds", cfg.weights.bounds},
                               {"momentum", cfg.weights.momentum},
                               {"smoothness", cfg.weights.smoothness}}}};
}

PipelineConfig config_from_json(const Json& j, PipelineConfig base) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be an object");
    base.k = j.value("k", base.k);
    base.max_iterations = j.value("max_iterations", base.max_iterations);
    base.tau = j.value("tau", base.tau);
    base.frame_count = j.value("frame_count", base.frame_count);
    base.rng_seed = j.value("rng_seed", base.rng_seed);
    if (j.contains("weights")) {
      const Json& w = j.at("weights");
      base.weights.penetration = w.value("penetration", base.weights.penetration);
      base.weights.bounds = w.value("bounds", base.weights.bounds);
      base.weights.momentum = w.value("momentum", base.weights.momentum);
      base.weights.smoothness = w.value("smoothness", base.weights.smoothness);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  return base;
}

}  // namespace cdrag::cot
