#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cdrag/core/json_io.hpp"
#include "cdrag/core/scene.hpp"
#include "cdrag/core/trajectory.hpp"
#include "cdrag/physics/kernels.hpp"

namespace cdrag::cot {

/// Output of the scene-understanding stage: which interaction rules govern
/// the scene and the physical constants they use.
struct SceneUnderstanding {
  std::string scene_label;
  InteractionType interaction_type = InteractionType::CollisionChain;
  bool gravity_active = false;
  std::vector<std::string> rule_set;
  Vec2 gravity;
  double restitution = 1.0;
};

enum class EdgeType { Contact, Adjacent, Supports, MirrorPair, LeverCoupled };
std::string_view to_string(EdgeType type);

struct RelationEdge {
  EdgeType type = EdgeType::Contact;
  std::string from;
  std::string to;
  /// Mirror index for MirrorPair, pivot index for LeverCoupled, -1 otherwise.
  int index = -1;

  friend bool operator==(const RelationEdge&, const RelationEdge&) = default;
};

struct RelationGraph {
  std::vector<std::string> nodes;
  std::vector<RelationEdge> edges;

  [[nodiscard]] std::vector<RelationEdge> edges_of(std::string_view id) const;
};

enum class MotionKind { Driven, Stationary, Ballistic, Coupled };
std::string_view to_string(MotionKind kind);

/// Frames [first_frame, last_frame] of one object governed by one motion rule.
struct MotionSegment {
  std::string object_id;
  int first_frame = 0;
  int last_frame = 0;
  MotionKind kind = MotionKind::Stationary;
};

struct RecordedCollision {
  physics::CollisionEvent event;
  /// True when the colliding bodies form a closed system (momentum must balance).
  bool closed = true;
};

struct ScoreBreakdown {
  double penetration = 0.0;
  double bounds = 0.0;
  double momentum = 0.0;
  double smoothness = 0.0;
  double total = 0.0;
};

struct CandidateBundle {
  std::vector<Trajectory> trajectories;  // sorted by object id
  double score = 0.0;
  int provenance = 0;
  double multiplier = 1.0;
  std::string controlled_id;
  std::vector<MotionSegment> segments;
  std::vector<RecordedCollision> collisions;
  /// Velocity each body carries into frame 0 (bodies absent are at rest).
  std::map<std::string, Vec2> entry_velocities;
  ScoreBreakdown breakdown;

  [[nodiscard]] const Trajectory* find(std::string_view id) const;
  [[nodiscard]] std::size_t frame_count() const {
    return trajectories.empty() ? 0 : trajectories.front().points.size();
  }
};

struct CandidateSet {
  std::vector<CandidateBundle> bundles;
};

struct ForwardViolation {
  std::string rule;
  int frame = 0;
  std::string object_id;
  double magnitude = 0.0;
};

struct ValidationReport {
  std::vector<ForwardViolation> forward_violations;
  double backward_error = 0.0;
  bool passed = false;
  int iterations_used = 0;
};

struct ScoreWeights {
  double penetration = 1.0;
  double bounds = 1.0;
  double momentum = 1.0;
  double smoothness = 1.0;
};

struct PipelineConfig {
  int k = 5;
  int max_iterations = 3;
  double tau = 2.0;
  int frame_count = 14;
  std::uint64_t rng_seed = 0;
  ScoreWeights weights;

  /// Throws Error(InvalidArgument) naming the first broken bound.
  void validate() const;
};

/// Impulse multiplier of candidate `index`: a fixed table for the first five,
/// then draws in [0.7, 1.3) from a generator seeded with `seed`.
double candidate_multiplier(std::uint64_t seed, std::size_t index);

Json to_json(const SceneUnderstanding& u);
Json to_json(const RelationGraph& g);
Json to_json(const CandidateBundle& b);
Json to_json(const CandidateSet& cs);
Json to_json(const ValidationReport& r);
Json to_json(const PipelineConfig& cfg);
Json to_json(const ScoreBreakdown& s);

/// Reads the keys present in `j` over `base` (k, max_iterations, tau,
/// frame_count, rng_seed, weights{penetration,bounds,momentum,smoothness}).
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {});

}  // namespace cdrag::cot
