#include "cdrag/core/scene.hpp"

#include <cmath>
#include <set>

#include "cdrag/error.hpp"

namespace cdrag {

std::string_view to_string(InteractionType type) {
  switch (type) {
    case InteractionType::CollisionChain: return "CollisionChain";
    case InteractionType::GravityForce: return "GravityForce";
    case InteractionType::LeverMirror: return "LeverMirror";
  }
  return "CollisionChain";
}

InteractionType parse_interaction_type(std::string_view text) {
  if (text == "CollisionChain") return InteractionType::CollisionChain;
  if (text == "GravityForce") return InteractionType::GravityForce;
  if (text == "LeverMirror") return InteractionType::LeverMirror;
  throw Error(ErrorCode::InvalidArgument, "unknown interaction type: " + std::string(text));
}

Mask SceneObject::effective_mask(int width, int height) const {
  if (mask && !mask->empty()) {
    return *mask;
  }
  return Mask::from_box(width, height, bbox);
}

const SceneObject* Scene::find(std::string_view id) const {
  for (const SceneObject& o : objects) {
    if (o.id == id) {
      return &o;
    }
  }
  return nullptr;
}

std::vector<Violation> validate_scene(const Scene& scene) {
  std::vector<Violation> out;
  auto add = [&out](std::string id, std::string rule, std::string message) {
    out.push_back({std::move(id), std::move(rule), std::move(message), std::nullopt});
  };

  if (scene.width <= 0 || scene.height <= 0) {
    add("", "scene-dims", "width and height must be positive");
  }
  if (!is_finite(scene.gravity)) {
    add("", "non-finite", "gravity must be finite");
  }

  std::set<std::string> seen;
  const BBox bounds = scene.bounds();
  for (const SceneObject& o : scene.objects) {
    if (!seen.insert(o.id).second) {
      add(o.id, "id-unique", "duplicate object id");
    }
    if (!o.bbox.is_finite()) {
      add(o.id, "non-finite", "bbox has non-finite coordinates");
      continue;
    }
    if (!o.bbox.is_valid()) {
      add(o.id, "bbox-degenerate", "bbox requires x1 < x2 and y1 < y2");
    }
    if (o.bbox.x1 < bounds.x1 || o.bbox.y1 < bounds.y1 || o.bbox.x2 > bounds.x2 ||
        o.bbox.y2 > bounds.y2) {
      add(o.id, "bbox-out-of-bounds", "bbox extends outside the scene");
    }
    if (!(o.mass > 0.0) || !std::isfinite(o.mass)) {
      add(o.id, "mass-positive", "mass must be a positive finite number");
    }
    if (o.mask && !o.mask->empty()) {
      if (o.mask->width() != scene.width || o.mask->height() != scene.height) {
        add(o.id, "mask-dims", "mask dimensions differ from the scene");
      } else if (!o.mask->well_formed()) {
        add(o.id, "mask-runs", "mask runs must be sorted, non-overlapping and in range");
      }
    }
  }

  for (std::size_t i = 0; i < scene.statics.mirrors.size(); ++i) {
    const Segment& m = scene.statics.mirrors[i];
    if (!is_finite(m.a) || !is_finite(m.b) || m.length() == 0.0) {
      add("mirror:" + std::to_string(i), "mirror-degenerate", "mirror segment has zero length");
    }
  }
  for (std::size_t i = 0; i < scene.statics.pivots.size(); ++i) {
    if (!is_finite(scene.statics.pivots[i])) {
      add("pivot:" + std::to_string(i), "non-finite", "pivot must be finite");
    }
  }
  if (scene.statics.ground) {
    const double g = *scene.statics.ground;
    if (!std::isfinite(g) || g < 0.0 || g > scene.height) {
      add("ground", "ground-out-of-bounds", "ground must lie within [0, height]");
    }
  }
  if (scene.statics.walls && !scene.statics.walls->is_valid()) {
    add("walls", "bbox-degenerate", "walls box is degenerate");
  }
  if (scene.restitution && !(*scene.restitution >= 0.0 && *scene.restitution <= 1.0)) {
    add("", "restitution-range", "restitution must lie in [0, 1]");
  }
  return out;
}

}  // namespace cdrag
