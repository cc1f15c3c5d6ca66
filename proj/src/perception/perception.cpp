#include "cdrag/perception/perception.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cdrag/error.hpp"

namespace cdrag::perception {

namespace {

[[noreturn]] void schema(const std::string& what) {
  throw Error(ErrorCode::FixtureSchemaInvalid, what);
}

BBox clip(const BBox& b, int width, int height) {
  return {std::clamp(b.x1, 0.0, static_cast<double>(width)),
          std::clamp(b.y1, 0.0, static_cast<double>(height)),
          std::clamp(b.x2, 0.0, static_cast<double>(width)),
          std::clamp(b.y2, 0.0, static_cast<double>(height))};
}

bool detection_order(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.bbox.x1 != b.bbox.x1) return a.bbox.x1 < b.bbox.x1;
  if (a.bbox.y1 != b.bbox.y1) return a.bbox.y1 < b.bbox.y1;
  return a.category < b.category;
}

}  // namespace

std::vector<SceneObject> ObjectInventory::all() const {
  std::vector<SceneObject> out;
  out.reserve(others.size() + 1);
  out.push_back(controlled);
  out.insert(out.end(), others.begin(), others.end());
  return out;
}

// ---------------------------------------------------------------------------
// FixtureBackend

FixtureBackend FixtureBackend::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::NotFound, "fixture not found: " + path.string());
  }
  Json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    schema(e.what());
  }
  return from_json(j);
}

FixtureBackend FixtureBackend::from_json(const Json& j) {
  FixtureBackend fb;
  try {
    fb.info_.image_ref = j.value("image_ref", std::string{});
    fb.info_.width = j.at("width").get<int>();
    fb.info_.height = j.at("height").get<int>();
    if (fb.info_.width <= 0 || fb.info_.height <= 0) schema("fixture dimensions must be positive");

    for (const Json& jm : j.value("masks", Json::array())) {
      NamedMask nm{jm.at("id").get<std::string>(),
                   Mask::from_flat_rle(fb.info_.width, fb.info_.height,
                                       jm.at("rle").get<std::vector<std::int64_t>>())};
      if (!nm.mask.well_formed()) schema("mask " + nm.id + " has malformed runs");
      fb.masks_.push_back(std::move(nm));
    }
    for (const Json& jd : j.value("detections", Json::array())) {
      Entry e;
      e.detection.bbox = jd.at("bbox").get<BBox>();
      e.detection.category = jd.at("category").get<std::string>();
      e.detection.confidence = jd.value("confidence", 1.0);
      e.detection.mask_id = jd.value("mask_id", std::string{});
      if (!(e.detection.confidence >= 0.0 && e.detection.confidence <= 1.0)) {
        schema("detection confidence must lie in [0, 1]");
      }
      if (!e.detection.bbox.is_valid()) schema("detection bbox is degenerate");
      if (!e.detection.mask_id.empty() && fb.mask_by_id(e.detection.mask_id) == nullptr) {
        schema("detection references unknown mask " + e.detection.mask_id);
      }
      if (jd.contains("refined_bbox")) e.refined_bbox = jd.at("refined_bbox").get<BBox>();
      fb.entries_.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    schema(std::string("fixture: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FixtureSchemaInvalid) throw;
    schema(std::string("fixture: ") + e.what());
  }
  return fb;
}

void FixtureBackend::check_ref(const std::string& image_ref) const {
  if (!image_ref.empty() && !info_.image_ref.empty() && image_ref != info_.image_ref) {
    throw Error(ErrorCode::NotFound, "fixture has no image " + image_ref);
  }
}

const Mask* FixtureBackend::mask_by_id(std::string_view id) const {
  for (const NamedMask& nm : masks_) {
    if (nm.id == id) return &nm.mask;
  }
  return nullptr;
}

ImageInfo FixtureBackend::image_info(const std::string& image_ref) const {
  check_ref(image_ref);
  return info_;
}

std::optional<Mask> FixtureBackend::segment(const std::string& image_ref, Point2 start) const {
  check_ref(image_ref);
  const NamedMask* best = nullptr;
  for (const NamedMask& nm : masks_) {
    if (!nm.mask.contains(start)) continue;
    if (best == nullptr || nm.mask.pixel_count() < best->mask.pixel_count()) best = &nm;
  }
  if (best == nullptr) return std::nullopt;
  return best->mask;
}

std::vector<Detection> FixtureBackend::detect(const std::string& image_ref,
                                              const Mask& /*controlled*/) const {
  check_ref(image_ref);
  std::vector<Detection> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) {
    Detection d = e.detection;
    if (const Mask* m = mask_by_id(d.mask_id)) d.mask = *m;
    out.push_back(std::move(d));
  }
  return out;
}

Refinement FixtureBackend::refine(const std::string& image_ref, const Detection& d) const {
  check_ref(image_ref);
  std::optional<BBox> refined;
  for (const Entry& e : entries_) {
    if (e.refined_bbox && e.detection.bbox == d.bbox && e.detection.category == d.category) {
      refined = e.refined_bbox;
      break;
    }
  }
  std::optional<Mask> mask = d.mask;
  if (!mask && !d.mask_id.empty()) {
    if (const Mask* m = mask_by_id(d.mask_id)) mask = *m;
  }
  if (!refined) {
    const auto mb = mask ? mask->bounds() : std::nullopt;
    refined = mb ? *mb : d.bbox;
  }
  const BBox box = clip(*refined, info_.width, info_.height);
  if (!mask || mask->empty()) mask = Mask::from_box(info_.width, info_.height, box);
  return {box, *mask};
}

// ---------------------------------------------------------------------------
// Module operations

std::unique_ptr<PerceptionBackend> make_backend(std::string_view spec, int width, int height,
                                                std::string prompt_template) {
  constexpr std::string_view kFixture = "fixture:";
  constexpr std::string_view kRemote = "remote:";
  if (spec.starts_with(kFixture)) {
    return std::make_unique<FixtureBackend>(
        FixtureBackend::load(std::string(spec.substr(kFixture.size()))));
  }
  if (spec.starts_with(kRemote)) {
    RemoteOptions opts;
    opts.url = std::string(spec.substr(kRemote.size()));
    opts.width = width;
    opts.height = height;
    opts.prompt_template = std::move(prompt_template);
    return std::make_unique<RemoteBackend>(std::move(opts));
  }
  throw Error(ErrorCode::InvalidArgument,
              "backend must be fixture:<path> or remote:<url>, got " + std::string(spec));
}

Mask segment_controlled(const PerceptionBackend& backend, const std::string& image_ref,
                        Point2 start) {
  const ImageInfo info = backend.image_info(image_ref);
  if (!is_finite(start) || start.x < 0.0 || start.y < 0.0 || start.x >= info.width ||
      start.y >= info.height) {
    throw Error(ErrorCode::InvalidArgument, "drag start lies outside the image");
  }
  auto mask = backend.segment(image_ref, start);
  if (!mask || !mask->contains(start)) {
    throw Error(ErrorCode::NotFound, "no object under the drag start");
  }
  return *mask;
}

std::vector<Detection> detect_objects(const PerceptionBackend& backend,
                                      const std::string& image_ref, const Mask& controlled_mask) {
  if (!controlled_mask.well_formed() || controlled_mask.empty()) {
    throw Error(ErrorCode::InvalidArgument, "controlled mask is empty or malformed");
  }
  std::vector<Detection> dets = backend.detect(image_ref, controlled_mask);
  const ImageInfo info = backend.image_info(image_ref);
  const bool covered = std::any_of(dets.begin(), dets.end(), [&](const Detection& d) {
    const Mask m = d.mask ? *d.mask : Mask::from_box(info.width, info.height, d.bbox);
    return m.overlap(controlled_mask) > 0;
  });
  if (!covered) {
    // The detector missed the dragged object; fall back to its segmentation.
    Detection self;
    self.bbox = *controlled_mask.bounds();
    self.category = "object";
    self.confidence = 1.0;
    self.mask = controlled_mask;
    dets.push_back(std::move(self));
  }
  std::stable_sort(dets.begin(), dets.end(), detection_order);
  return dets;
}

ObjectInventory refine_detections(const PerceptionBackend& backend, const std::string& image_ref,
                                  std::span<const Detection> detections,
                                  const Mask& controlled_mask) {
  if (detections.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no detections to refine");
  }
  std::map<std::string, int> rank;
  std::vector<SceneObject> objects;
  objects.reserve(detections.size());
  for (const Detection& d : detections) {
    Refinement r = backend.refine(image_ref, d);
    SceneObject o;
    o.id = d.category + "_" + std::to_string(rank[d.category]++);
    o.category = d.category;
    o.bbox = r.bbox;
    o.mass = r.bbox.area() > 0.0 ? r.bbox.area() : 1.0;
    o.mobile = true;
    o.mask = std::move(r.mask);
    objects.push_back(std::move(o));
  }

  std::size_t best = 0;
  std::int64_t best_overlap = -1;
  std::int64_t best_size = -1;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::int64_t ov = objects[i].mask->overlap(controlled_mask);
    const std::int64_t size = objects[i].mask->pixel_count();
    if (ov > best_overlap || (ov == best_overlap && size > best_size)) {
      best = i;
      best_overlap = ov;
      best_size = size;
    }
  }
  if (best_overlap <= 0) {
    throw Error(ErrorCode::NotFound, "no detection overlaps the controlled mask");
  }
  ObjectInventory inv;
  inv.controlled = objects[best];
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (i != best) inv.others.push_back(std::move(objects[i]));
  }
  return inv;
}

ObjectInventory perceive(const PerceptionBackend& backend, const std::string& image_ref,
                         Point2 start) {
  const Mask controlled = segment_controlled(backend, image_ref, start);
  const auto detections = detect_objects(backend, image_ref, controlled);
  return refine_detections(backend, image_ref, detections, controlled);
}

ObjectInventory inventory_from_scene(const Scene& scene, Point2 start) {
  const SceneObject* pick = nullptr;
  for (const SceneObject& o : scene.objects) {
    const bool hit = (o.mask && !o.mask->empty()) ? o.mask->contains(start) : o.bbox.contains(start);
    if (!hit) continue;
    if (pick == nullptr || o.bbox.area() < pick->bbox.area() ||
        (o.bbox.area() == pick->bbox.area() && o.id < pick->id)) {
      pick = &o;
    }
  }
  if (pick == nullptr) {
    throw Error(ErrorCode::InvalidDrag, "drag start is not on any object");
  }
  ObjectInventory inv;
  inv.controlled = *pick;
  if (!inv.controlled.mask || inv.controlled.mask->empty()) {
    inv.controlled.mask = Mask::from_box(scene.width, scene.height, pick->bbox);
  }
  for (const SceneObject& o : scene.objects) {
    if (o.id != pick->id) inv.others.push_back(o);
  }
  return inv;
}

}  // namespace cdrag::perception
