#include "cdrag/core/json_io.hpp"

#include <fstream>
#include <sstream>

#include "cdrag/error.hpp"

namespace cdrag {

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::ParseError, what);
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    schema_error(std::string("missing key '") + key + "'");
  }
  return j.at(key);
}

Mask mask_from_json(const Json& j, int width, int height) {
  const int w = j.value("width", width);
  const int h = j.value("height", height);
  return Mask::from_flat_rle(w, h, require(j, "rle").get<std::vector<std::int64_t>>());
}

}  // namespace

void to_json(Json& j, const Vec2& p) { j = Json::array({p.x, p.y}); }

void from_json(const Json& j, Vec2& p) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    schema_error("point must be [x, y]");
  }
  p = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(Json& j, const BBox& b) { j = Json::array({b.x1, b.y1, b.x2, b.y2}); }

void from_json(const Json& j, BBox& b) {
  if (!j.is_array() || j.size() != 4) {
    schema_error("bbox must be [x1, y1, x2, y2]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) schema_error("bbox entries must be numbers");
  }
  b = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

void to_json(Json& j, const Trajectory& t) {
  j = Json{{"object_id", t.object_id}, {"points", t.points}};
}

void from_json(const Json& j, Trajectory& t) {
  t.object_id = require(j, "object_id").get<std::string>();
  t.points = require(j, "points").get<std::vector<Point2>>();
}

Json scene_to_json(const Scene& scene) {
  Json objects = Json::array();
  for (const SceneObject& o : scene.objects) {
    Json jo{{"id", o.id}, {"category", o.category}, {"bbox", o.bbox},
            {"mass", o.mass}, {"mobile", o.mobile}};
    if (o.mask) {
      jo["mask"] = Json{{"rle", o.mask->flat_rle()}};
    }
    objects.push_back(std::move(jo));
  }
  Json mirrors = Json::array();
  for (const Segment& m : scene.statics.mirrors) {
    mirrors.push_back(Json::array({m.a, m.b}));
  }
  Json statics{{"mirrors", mirrors}, {"pivots", scene.statics.pivots}};
  if (scene.statics.ground) statics["ground"] = *scene.statics.ground;
  if (scene.statics.walls) statics["walls"] = *scene.statics.walls;

  Json j{{"width", scene.width},   {"height", scene.height}, {"gravity", scene.gravity},
         {"objects", objects},     {"statics", statics}};
  if (scene.restitution) j["restitution"] = *scene.restitution;
  if (scene.scene_category) j["scene_category"] = *scene.scene_category;
  if (!scene.image_ref.empty()) j["image_ref"] = scene.image_ref;
  return j;
}

Scene scene_from_json(const Json& j) {
  try {
    Scene scene;
    scene.width = require(j, "width").get<int>();
    scene.height = require(j, "height").get<int>();
    if (j.contains("gravity")) scene.gravity = j.at("gravity").get<Vec2>();
    if (j.contains("restitution")) scene.restitution = j.at("restitution").get<double>();
    if (j.contains("scene_category")) scene.scene_category = j.at("scene_category").get<std::string>();
    scene.image_ref = j.value("image_ref", std::string{});

    for (const Json& jo : require(j, "objects")) {
      SceneObject o;
      o.id = require(jo, "id").get<std::string>();
      o.category = jo.value("category", std::string("object"));
      o.bbox = require(jo, "bbox").get<BBox>();
      o.mass = jo.contains("mass") ? jo.at("mass").get<double>() : o.bbox.area();
      o.mobile = jo.value("mobile", true);
      if (jo.contains("mask") && !jo.at("mask").is_null()) {
        Mask m = mask_from_json(jo.at("mask"), scene.width, scene.height);
        if (!m.empty()) o.mask = std::move(m);
      }
      scene.objects.push_back(std::move(o));
    }

    if (j.contains("statics")) {
      const Json& js = j.at("statics");
      for (const Json& jm : js.value("mirrors", Json::array())) {
        if (!jm.is_array() || jm.size() != 2) schema_error("mirror must be [[x,y],[x,y]]");
        scene.statics.mirrors.push_back({jm[0].get<Point2>(), jm[1].get<Point2>()});
      }
      scene.statics.pivots = js.value("pivots", Json::array()).get<std::vector<Point2>>();
      if (js.contains("ground") && !js.at("ground").is_null()) {
        scene.statics.ground = js.at("ground").get<double>();
      }
      if (js.contains("walls") && !js.at("walls").is_null()) {
        scene.statics.walls = js.at("walls").get<BBox>();
      }
    }
    return scene;
  } catch (const Json::exception& e) {
    schema_error(std::string("scene: ") + e.what());
  } catch (const Error& e) {
    schema_error(std::string("scene: ") + e.what());
  }
}

Json drag_to_json(const DragInput& drag) {
  return Json{{"object_id", drag.points.object_id},
              {"start", drag.start},
              {"points", drag.points.points}};
}

DragInput drag_from_json(const Json& j) {
  try {
    auto points = require(j, "points").get<std::vector<Point2>>();
    if (points.empty()) schema_error("drag needs at least one point");
    DragInput drag = DragInput::from_points(j.value("object_id", std::string("controlled")),
                                            std::move(points));
    if (j.contains("start")) {
      const auto start = j.at("start").get<Point2>();
      if (!(start == drag.start)) schema_error("drag start must equal the first point");
    }
    return drag;
  } catch (const Json::exception& e) {
    schema_error(std::string("drag: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::NotFound, "cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + " at byte " + std::to_string(e.byte) +
                                           ": " + e.what());
  }
}

}  // namespace cdrag
