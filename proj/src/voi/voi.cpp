#include "cdrag/voi/voi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "cdrag/error.hpp"

namespace cdrag::voi {

namespace fs = std::filesystem;

namespace {

struct KnownCategory {
  InteractionType subset;
  const char* name;
};

// Row order of the published dataset table.
constexpr std::array<KnownCategory, 7> kKnownCategories{{
    {InteractionType::CollisionChain, "Billiard"},
    {InteractionType::CollisionChain, "NewtonCradle"},
    {InteractionType::CollisionChain, "Traffic"},
    {InteractionType::GravityForce, "Basketball"},
    {InteractionType::GravityForce, "FootBall"},
    {InteractionType::LeverMirror, "Seesaw"},
    {InteractionType::LeverMirror, "Mirror"},
}};

constexpr std::array<InteractionType, 3> kSubsets{
    InteractionType::CollisionChain, InteractionType::GravityForce, InteractionType::LeverMirror};

Json number(double v) {
  if (std::trunc(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  return v;
}

Json point_json(Point2 p) { return Json::array({number(p.x), number(p.y)}); }

Json box_json(const BBox& b) {
  return Json::array({number(b.x1), number(b.y1), number(b.x2), number(b.y2)});
}

int parse_frame_key(const std::string& key) {
  std::size_t used = 0;
  int frame = -1;
  try {
    frame = std::stoi(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || frame < 0) {
    throw Error(ErrorCode::ParseError, "frame key \"" + key + "\" is not a frame index");
  }
  return frame;
}

fs::path anno_path(const fs::path& root, const VideoRef& ref) {
  const fs::path p = root / ref.path;
  if (p.extension() == ".json") return p;
  return p / "anno.json";
}

Violation issue(const std::string& video, const std::string& rule, const std::string& message) {
  return Violation{video, rule, message, std::nullopt};
}

}  // namespace

std::size_t VoiVideo::box_count() const {
  std::size_t n = 0;
  for (const auto& [frame, objects] : boxes) n += objects.size();
  return n;
}

VoiVideo video_from_json(const Json& anno, const VideoRef& ref) {
  try {
    if (!anno.is_object()) throw Error(ErrorCode::ParseError, "annotation must be an object");
    VoiVideo v;
    v.id = ref.id;
    v.subset = parse_interaction_type(ref.subset);
    v.category = ref.category;
    v.frame_count = anno.at("frame_count").get<int>();
    v.controlled_id = anno.value("controlled_id", std::string{});
    for (const auto& [key, objects] : anno.at("boxes").items()) {
      FrameBoxes& frame = v.boxes[parse_frame_key(key)];
      for (const auto& [id, box] : objects.items()) frame[id] = box.get<BBox>();
    }
    for (const Json& t : anno.value("trajectories", Json::array())) {
      AnnotatedTrack track;
      track.trajectory = t.get<Trajectory>();
      track.start_frame = t.value("start_frame", 0);
      v.trajectories.push_back(std::move(track));
    }
    for (const auto& [key, value] : anno.items()) {
      if (key != "frame_count" && key != "controlled_id" && key != "boxes" &&
          key != "trajectories") {
        v.extra[key] = value;
      }
    }
    return v;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("annotation schema: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, e.what());
  }
}

Json video_to_json(const VoiVideo& video) {
  Json out = video.extra.is_object() ? video.extra : Json::object();
  out["frame_count"] = video.frame_count;
  if (!video.controlled_id.empty()) out["controlled_id"] = video.controlled_id;
  Json boxes = Json::object();
  for (const auto& [frame, objects] : video.boxes) {
    Json row = Json::object();
    for (const auto& [id, box] : objects) row[id] = box_json(box);
    boxes[std::to_string(frame)] = std::move(row);
  }
  out["boxes"] = std::move(boxes);
  Json tracks = Json::array();
  for (const AnnotatedTrack& t : video.trajectories) {
    Json points = Json::array();
    for (const Point2& p : t.trajectory.points) points.push_back(point_json(p));
    Json jt{{"object_id", t.trajectory.object_id}, {"points", std::move(points)}};
    if (t.start_frame != 0) jt["start_frame"] = t.start_frame;
    tracks.push_back(std::move(jt));
  }
  out["trajectories"] = std::move(tracks);
  return out;
}

VoiIndex load_index(const fs::path& root) {
  const fs::path index_file = root / "index.json";
  if (!fs::exists(index_file)) {
    throw Error(ErrorCode::NotFound, "no index.json under " + root.string());
  }
  const Json doc = read_json_file(index_file);

  VoiIndex index;
  index.root = root;
  try {
    for (const Json& jv : doc.at("videos")) {
      VideoRef ref;
      ref.id = jv.at("id").get<std::string>();
      ref.subset = jv.at("subset").get<std::string>();
      ref.category = jv.at("category").get<std::string>();
      ref.path = jv.at("path").get<std::string>();
      for (const auto& [key, value] : jv.items()) {
        if (key != "id" && key != "subset" && key != "category" && key != "path") {
          ref.extra[key] = value;
        }
      }
      index.refs.push_back(std::move(ref));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, index_file.string() + ": " + e.what());
  }

  std::set<std::string> seen;
  for (const VideoRef& ref : index.refs) {
    if (!seen.insert(ref.id).second) {
      index.issues.push_back(issue(ref.id, "video-id-unique", "duplicate video id"));
      continue;
    }
    const fs::path path = anno_path(root, ref);
    try {
      VoiVideo video = video_from_json(read_json_file(path), ref);
      index.videos.push_back(std::move(video));
    } catch (const Error& e) {
      const std::string rule = e.code() == ErrorCode::NotFound ? "anno-missing" : "anno-invalid";
      index.issues.push_back(issue(ref.id, rule, path.string() + ": " + e.what()));
    }
  }
  return index;
}

Json index_to_json(const VoiIndex& index) {
  Json videos = Json::array();
  for (const VideoRef& ref : index.refs) {
    Json jv = ref.extra.is_object() ? ref.extra : Json::object();
    jv["id"] = ref.id;
    jv["subset"] = ref.subset;
    jv["category"] = ref.category;
    jv["path"] = ref.path;
    videos.push_back(std::move(jv));
  }
  return Json{{"videos", std::move(videos)}};
}

void write_index(const VoiIndex& index, const fs::path& root) {
  auto write = [](const fs::path& path, const Json& j) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << j.dump(2) << '\n';
  };
  write(root / "index.json", index_to_json(index));
  for (const VoiVideo& video : index.videos) {
    const auto it = std::find_if(index.refs.begin(), index.refs.end(),
                                 [&](const VideoRef& r) { return r.id == video.id; });
    if (it == index.refs.end()) continue;
    write(anno_path(root, *it), video_to_json(video));
  }
}

DerivedTrajectory derive_center_trajectory(const VoiVideo& video, const std::string& object_id) {
  std::vector<std::pair<int, Point2>> centers;
  for (const auto& [frame, objects] : video.boxes) {
    const auto it = objects.find(object_id);
    if (it != objects.end()) centers.emplace_back(frame, it->second.center());
  }
  if (centers.empty()) {
    throw Error(ErrorCode::NotFound, object_id + " has no box in " + video.id);
  }

  std::vector<AnnotatedTrack> pieces;
  AnnotatedTrack current{{object_id, {centers.front().second}}, centers.front().first};
  for (std::size_t i = 1; i < centers.size(); ++i) {
    const auto [f0, p0] = centers[i - 1];
    const auto [f1, p1] = centers[i];
    const int missing = f1 - f0 - 1;
    if (missing > kMaxInterpolatedGap) {
      pieces.push_back(std::move(current));
      current = AnnotatedTrack{{object_id, {p1}}, f1};
      continue;
    }
    for (int k = 1; k <= missing; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(f1 - f0);
      current.trajectory.points.push_back(p0 + (p1 - p0) * t);
    }
    current.trajectory.points.push_back(p1);
  }
  pieces.push_back(std::move(current));

  DerivedTrajectory out;
  out.track = std::move(pieces.front());
  out.remainder.assign(std::make_move_iterator(pieces.begin() + 1),
                       std::make_move_iterator(pieces.end()));
  return out;
}

std::vector<Violation> verify_annotations(const VoiVideo& video) {
  std::vector<Violation> out;
  std::set<std::string> annotated;
  for (const auto& [frame, objects] : video.boxes) {
    if (frame >= video.frame_count) {
      out.push_back({"", "frame-out-of-range",
                     "box frame " + std::to_string(frame) + " beyond frame_count", frame});
    }
    for (const auto& [id, box] : objects) annotated.insert(id);
  }
  for (const AnnotatedTrack& t : video.trajectories) {
    const std::string& id = t.trajectory.object_id;
    if (!annotated.contains(id)) {
      out.push_back({id, "unknown-object", "trajectory object has no boxes", std::nullopt});
      continue;
    }
    const auto len = static_cast<int>(t.trajectory.points.size());
    if (t.start_frame < 0 || t.start_frame + len > video.frame_count) {
      out.push_back({id, "trajectory-too-long", "trajectory runs past the last frame",
                     std::nullopt});
    }
    for (int k = 0; k < len; ++k) {
      const int frame = t.start_frame + k;
      const auto fit = video.boxes.find(frame);
      if (fit == video.boxes.end()) continue;
      const auto bit = fit->second.find(id);
      if (bit == fit->second.end()) continue;
      const Point2 p = t.trajectory.points[static_cast<std::size_t>(k)];
      if (!bit->second.dilated(kAnnotationDilation).contains(p)) {
        out.push_back({id, "outside-box", "trajectory point lies outside its box", frame});
      }
    }
  }
  return out;
}

StatsTable stats(const VoiIndex& index) {
  StatsTable table;
  for (const KnownCategory& k : kKnownCategories) {
    table.rows.push_back({std::string(to_string(k.subset)), k.name, 0, 0, 0});
  }
  std::map<std::pair<std::string, std::string>, StatsRow> unknown;
  for (const VoiVideo& v : index.videos) {
    const std::string subset(to_string(v.subset));
    auto it = std::find_if(table.rows.begin(), table.rows.end(), [&](const StatsRow& r) {
      return r.subset == subset && r.category == v.category;
    });
    StatsRow* row = nullptr;
    if (it != table.rows.end()) {
      row = &*it;
    } else {
      auto [u, inserted] = unknown.try_emplace({subset, v.category});
      if (inserted) u->second = StatsRow{subset, v.category, 0, 0, 0};
      row = &u->second;
    }
    row->videos += 1;
    row->boxes += v.box_count();
    row->trajectories += v.trajectories.size();
  }
  for (auto& [key, row] : unknown) table.rows.push_back(row);

  for (InteractionType s : kSubsets) {
    StatsRow sub{std::string(to_string(s)), "-", 0, 0, 0};
    for (const StatsRow& r : table.rows) {
      if (r.subset != sub.subset) continue;
      sub.videos += r.videos;
      sub.boxes += r.boxes;
      sub.trajectories += r.trajectories;
    }
    table.subsets.push_back(sub);
  }
  table.total = StatsRow{"Total", "-", 0, 0, 0};
  for (const StatsRow& r : table.rows) {
    table.total.videos += r.videos;
    table.total.boxes += r.boxes;
    table.total.trajectories += r.trajectories;
  }
  return table;
}

Json to_json(const StatsTable& table) {
  auto row_json = [](const StatsRow& r) {
    return Json{{"subset", r.subset}, {"category", r.category}, {"videos", r.videos},
                {"boxes", r.boxes}, {"trajectories", r.trajectories}};
  };
  Json rows = Json::array();
  for (const StatsRow& r : table.rows) rows.push_back(row_json(r));
  Json subsets = Json::array();
  for (const StatsRow& r : table.subsets) subsets.push_back(row_json(r));
  return Json{{"rows", rows}, {"subsets", subsets}, {"total", row_json(table.total)}};
}

}  // namespace cdrag::voi
