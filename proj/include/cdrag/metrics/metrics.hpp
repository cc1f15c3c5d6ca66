#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdrag/core/json_io.hpp"
#include "cdrag/core/trajectory.hpp"

namespace cdrag::metrics {

enum class MatchMode {
  Auto,     // identity when both sides carry the same ids, else spatial
  Id,       // shared ids only
  Spatial,  // optimal assignment on first-frame distance
};

struct Matching {
  std::vector<std::pair<std::string, std::string>> pairs;  // (predicted id, ground-truth id)
  std::vector<std::string> unmatched_predicted;
  std::vector<std::string> unmatched_ground_truth;
};

inline constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

/// Minimum-cost assignment for a rectangular cost matrix. Returns, per row,
/// the assigned column or kUnassigned when rows outnumber columns.
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost);

/// Throws Error(InvalidArgument) when either side is empty.
Matching match_objects(std::span<const Trajectory> predicted,
                       std::span<const Trajectory> ground_truth, MatchMode mode = MatchMode::Auto);

struct EvalPair {
  std::string video_id;
  std::vector<Trajectory> predicted;
  std::vector<Trajectory> ground_truth;
  std::vector<std::pair<std::string, std::string>> matching;
};

struct MetricResult {
  double value = 0.0;
  std::size_t n_terms = 0;
  /// Mean distance per matched track, keyed "<video>/<gt id>" (just the id
  /// when the video id is empty).
  std::map<std::string, double> per_object;
};

/// Mean Euclidean distance over every matched point of every pair. Predictions
/// are resampled to the ground-truth length first.
/// Throws Error(UndefinedMetric) when nothing is matched.
MetricResult moc(std::span<const EvalPair> pairs);

/// moc restricted to the track matched to ground-truth id `controlled_id`.
/// Throws Error(NotFound) when that track is not matched.
MetricResult objmc(const EvalPair& pair, const std::string& controlled_id);

struct VideoTracks {
  std::string video_id;
  std::vector<Trajectory> trajectories;
  std::string controlled_id;  // may be empty
};

/// `{"moc","objmc","n_terms","per_video":[...],"unmatched":[...]}` over the
/// videos present on both sides, in video id order.
/// Throws Error(InvalidArgument) when no video id is shared.
Json evaluate(std::span<const VideoTracks> predicted, std::span<const VideoTracks> ground_truth,
              MatchMode mode = MatchMode::Auto);

}  // namespace cdrag::metrics
