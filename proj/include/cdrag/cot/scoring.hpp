#pragma once

#include <vector>

#include "cdrag/cot/types.hpp"

namespace cdrag::cot {

/// One measured term of the ranking score, kept per frame so validation can
/// threshold the same quantities the ranking sums.
struct ScoreTerm {
  int frame = 0;
  std::string object_id;
  double value = 0.0;
};

/// Pairwise circle-proxy overlap depth per frame (only positive depths).
std::vector<ScoreTerm> penetration_terms(const CandidateBundle& bundle, const Scene& scene);

/// Distance of each point outside the play area (walls, else the image).
std::vector<ScoreTerm> bounds_terms(const CandidateBundle& bundle, const Scene& scene);

/// Relative momentum imbalance of each contact group at a closed collision frame.
std::vector<ScoreTerm> momentum_terms(const CandidateBundle& bundle, const Scene& scene);

/// Sum of |second difference| over the interior of non-ballistic segments.
double smoothness_term(const CandidateBundle& bundle);

ScoreBreakdown score_bundle(const CandidateBundle& bundle, const Scene& scene,
                            const ScoreWeights& weights);

/// Velocity of `id` entering frame f: p(f) - p(f-1), or the recorded entry velocity at f = 0.
Vec2 incoming_velocity(const CandidateBundle& bundle, const Trajectory& t, std::size_t f);

}  // namespace cdrag::cot
