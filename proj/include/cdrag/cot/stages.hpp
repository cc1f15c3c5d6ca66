#pragma once

#include <span>
#include <vector>

#include "cdrag/cot/types.hpp"
#include "cdrag/perception/perception.hpp"

namespace cdrag::cot {

using perception::ObjectInventory;

inline constexpr double kDefaultGravity = 0.5;          // px / frame^2, downward
inline constexpr double kContactGap = 2.0;              // px
inline constexpr double kAdjacentFraction = 0.5;        // of mean bbox width
inline constexpr double kMirrorCornerTolerance = 10.0;  // px
inline constexpr double kLeverArmRatio = 1.5;
inline constexpr double kSupportTolerance = 2.0;        // px

/// S1: pick the interaction rule set from the static context.
SceneUnderstanding stage1_understand(const ObjectInventory& inventory, const Scene& scene);

/// S2: typed spatial relations between every pair of inventory objects.
RelationGraph stage2_relations(const SceneUnderstanding& understanding,
                               const ObjectInventory& inventory, const Scene& scene);

/// S3: K candidate bundles for iteration `iteration`, provenance indices
/// iteration*K .. iteration*K + K - 1. Throws Error(InvalidDrag) when the
/// drag does not start on the controlled object.
CandidateSet stage3_interactions(const RelationGraph& graph,
                                 const SceneUnderstanding& understanding, const DragInput& drag,
                                 const ObjectInventory& inventory, const Scene& scene,
                                 const PipelineConfig& cfg, int iteration = 0);

/// S4: scores every bundle and returns the minimum. Throws on an empty set.
CandidateBundle stage4_rank(const CandidateSet& candidates, const Scene& scene,
                            const PipelineConfig& cfg);

/// Returns a copy of `candidates` with score and breakdown filled in.
CandidateSet score_candidates(const CandidateSet& candidates, const Scene& scene,
                              const PipelineConfig& cfg);

/// Argmin of the stored scores; ties go to the lowest provenance.
const CandidateBundle& select_best(std::span<const CandidateBundle> bundles);

/// S5: forward rule checks plus backward reconstruction of the drag.
ValidationReport stage5_validate(const CandidateBundle& best, const DragInput& drag,
                                 const SceneUnderstanding& understanding,
                                 const RelationGraph& graph, const Scene& scene,
                                 const PipelineConfig& cfg);

}  // namespace cdrag::cot
