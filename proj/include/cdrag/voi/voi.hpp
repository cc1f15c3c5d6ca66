#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cdrag/core/json_io.hpp"
#include "cdrag/core/scene.hpp"
#include "cdrag/core/trajectory.hpp"

namespace cdrag::voi {

/// A trajectory plus the video frame its first point belongs to.
struct AnnotatedTrack {
  Trajectory trajectory;
  int start_frame = 0;
};

using FrameBoxes = std::map<std::string, BBox>;

struct VoiVideo {
  std::string id;
  InteractionType subset = InteractionType::CollisionChain;
  std::string category;
  int frame_count = 0;
  std::map<int, FrameBoxes> boxes;  // frame -> object id -> box
  std::vector<AnnotatedTrack> trajectories;
  std::string controlled_id;
  /// Keys of anno.json this reader does not interpret (fps, resolution, ...).
  Json extra = Json::object();

  [[nodiscard]] std::size_t box_count() const;
};

struct VideoRef {
  std::string id;
  std::string subset;
  std::string category;
  std::string path;  // relative to the root: a directory holding anno.json, or the file itself
  Json extra = Json::object();
};

struct VoiIndex {
  std::filesystem::path root;
  std::vector<VideoRef> refs;
  std::vector<VoiVideo> videos;  // the refs whose annotations loaded
  std::vector<Violation> issues;
};

VoiVideo video_from_json(const Json& anno, const VideoRef& ref);
/// Canonical anno.json; integral coordinates are written as integers.
Json video_to_json(const VoiVideo& video);

/// Reads root/index.json and every annotation it references. Problems with
/// individual annotation files are collected in `issues`.
/// Throws Error(NotFound) without an index, Error(ParseError) for a broken one.
VoiIndex load_index(const std::filesystem::path& root);

/// Writes index.json and each video's annotation file under `root`, keys sorted.
void write_index(const VoiIndex& index, const std::filesystem::path& root);

Json index_to_json(const VoiIndex& index);

struct DerivedTrajectory {
  AnnotatedTrack track;
  /// Pieces after gaps longer than kMaxInterpolatedGap frames.
  std::vector<AnnotatedTrack> remainder;
};

inline constexpr int kMaxInterpolatedGap = 2;
inline constexpr double kAnnotationDilation = 2.0;  // px

/// Box-center track of one object. Throws Error(NotFound) when the object has no box.
DerivedTrajectory derive_center_trajectory(const VoiVideo& video, const std::string& object_id);

/// One Violation per trajectory point outside its box dilated by 2 px, plus
/// structural problems (unknown object, track longer than the video).
std::vector<Violation> verify_annotations(const VoiVideo& video);

struct StatsRow {
  std::string subset;
  std::string category;
  std::size_t videos = 0;
  std::size_t boxes = 0;
  std::size_t trajectories = 0;
};

struct StatsTable {
  std::vector<StatsRow> rows;     // known categories first, in the published order
  std::vector<StatsRow> subsets;  // one per interaction type
  StatsRow total;
};

StatsTable stats(const VoiIndex& index);
Json to_json(const StatsTable& table);

}  // namespace cdrag::voi
