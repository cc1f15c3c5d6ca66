#include <algorithm>
#include <tuple>

#include "cdrag/api/api.hpp"
#include "cdrag/error.hpp"
#include "cdrag/voi/voi.hpp"

namespace cdrag::api {

namespace fs = std::filesystem;

Json reason(const Scene& scene, const DragInput& drag, const cot::PipelineConfig& cfg,
            const perception::PerceptionBackend* backend, cot::PipelineResult* result) {
  cot::PipelineResult r = cot::Pipeline(cfg).run(scene, drag, backend);
  Json out = cot::to_json(r);
  if (result != nullptr) *result = std::move(r);
  return out;
}

namespace {

std::vector<Trajectory> trajectories_of(const Json& doc, const fs::path& file) {
  try {
    if (doc.is_array()) return doc.get<std::vector<Trajectory>>();
    return doc.at("trajectories").get<std::vector<Trajectory>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
}

std::string controlled_of(const Json& doc) {
  if (!doc.is_object()) return {};
  if (doc.contains("controlled_id")) return doc["controlled_id"].get<std::string>();
  if (doc.contains("report") && doc["report"].contains("controlled_id")) {
    return doc["report"]["controlled_id"].get<std::string>();
  }
  return {};
}

}  // namespace

std::vector<metrics::VideoTracks> load_tracks(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::NotFound, "no directory " + dir.string());
  std::vector<metrics::VideoTracks> out;
  if (fs::exists(dir / "index.json")) {
    for (const voi::VoiVideo& v : voi::load_index(dir).videos) {
      metrics::VideoTracks tracks{v.id, {}, v.controlled_id};
      for (const voi::AnnotatedTrack& t : v.trajectories) tracks.trajectories.push_back(t.trajectory);
      out.push_back(std::move(tracks));
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
      const Json doc = read_json_file(file);
      out.push_back({file.stem().string(), trajectories_of(doc, file), controlled_of(doc)});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
  return out;
}

Json export_drag(const Json& result, DragFormat format) {
  const std::vector<Trajectory> tracks = trajectories_of(result, "result");
  if (format == DragFormat::Canonical) return tracks;

  struct Row {
    std::size_t frame;
    const std::string* id;
    Point2 p;
  };
  std::vector<Row> rows;
  for (const Trajectory& t : tracks) {
    for (std::size_t k = 0; k < t.points.size(); ++k) rows.push_back({k, &t.object_id, t.points[k]});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.frame, *a.id) < std::tie(b.frame, *b.id);
  });
  Json out = Json::array();
  for (const Row& r : rows) out.push_back(Json::array({*r.id, r.p.x, r.p.y}));
  return out;
}

Json dataset_stats(const fs::path& root) {
  const voi::VoiIndex index = voi::load_index(root);
  Json out = voi::to_json(voi::stats(index));
  Json issues = Json::array();
  for (const Violation& v : index.issues) {
    issues.push_back(Json{{"video_id", v.object_id}, {"rule", v.rule}, {"message", v.message}});
  }
  out["issues"] = std::move(issues);
  return out;
}

}  // namespace cdrag::api
