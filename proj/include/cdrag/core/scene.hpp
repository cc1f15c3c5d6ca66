#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdrag/core/geometry.hpp"
#include "cdrag/core/mask.hpp"

namespace cdrag {

enum class InteractionType { CollisionChain, GravityForce, LeverMirror };

std::string_view to_string(InteractionType type);
/// Accepts the enum spelling ("CollisionChain", ...). Throws Error(InvalidArgument).
InteractionType parse_interaction_type(std::string_view text);

struct SceneObject {
  std::string id;
  std::string category;
  BBox bbox;
  std::optional<Mask> mask;
  double mass = 1.0;
  bool mobile = true;

  /// Mask if present and non-empty, otherwise the rasterized bbox.
  [[nodiscard]] Mask effective_mask(int width, int height) const;
};

struct StaticGeometry {
  std::vector<Segment> mirrors;
  std::vector<Point2> pivots;
  std::optional<double> ground;
  std::optional<BBox> walls;
};

struct Scene {
  int width = 0;
  int height = 0;
  std::vector<SceneObject> objects;
  StaticGeometry statics;
  Vec2 gravity{};
  /// Optional overrides; the pipeline falls back to its own defaults.
  std::optional<double> restitution;
  std::optional<std::string> scene_category;
  std::string image_ref;

  [[nodiscard]] const SceneObject* find(std::string_view id) const;
  [[nodiscard]] BBox bounds() const {
    return {0.0, 0.0, static_cast<double>(width), static_cast<double>(height)};
  }
};

struct Violation {
  std::string object_id;
  std::string rule;
  std::string message;
  std::optional<int> frame;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// One Violation per broken invariant; an empty result means every
/// downstream module accepts the scene.
std::vector<Violation> validate_scene(const Scene& scene);

}  // namespace cdrag
