#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdrag/core/json_io.hpp"
#include "cdrag/core/mask.hpp"
#include "cdrag/core/scene.hpp"

namespace cdrag::perception {

struct ImageInfo {
  std::string image_ref;
  int width = 0;
  int height = 0;
};

struct Detection {
  BBox bbox;
  std::string category;
  double confidence = 1.0;
  /// Backend-side handle to the detection's mask, if any.
  std::string mask_id;
  /// Inline mask when the backend returned one directly.
  std::optional<Mask> mask;
};

struct Refinement {
  BBox bbox;
  Mask mask;
};

struct ObjectInventory {
  SceneObject controlled;
  std::vector<SceneObject> others;

  /// Controlled object first, then the others in inventory order.
  [[nodiscard]] std::vector<SceneObject> all() const;
};

/// Source of segmentation, detection and refinement answers for one image.
/// Implementations are read-only after construction and may be shared
/// between threads.
class PerceptionBackend {
 public:
  virtual ~PerceptionBackend() = default;

  [[nodiscard]] virtual ImageInfo image_info(const std::string& image_ref) const = 0;
  /// Class-agnostic segmentation at a point; nullopt when nothing is there.
  [[nodiscard]] virtual std::optional<Mask> segment(const std::string& image_ref,
                                                    Point2 start) const = 0;
  [[nodiscard]] virtual std::vector<Detection> detect(const std::string& image_ref,
                                                      const Mask& controlled) const = 0;
  [[nodiscard]] virtual Refinement refine(const std::string& image_ref,
                                          const Detection& detection) const = 0;
};

/// Precomputed answers read from a fixture document:
/// `{"image_ref","width","height","masks":[{"id","rle"}],
///   "detections":[{"bbox","category","confidence"?,"mask_id"?,"refined_bbox"?}]}`.
class FixtureBackend final : public PerceptionBackend {
 public:
  static FixtureBackend load(const std::filesystem::path& path);
  static FixtureBackend from_json(const Json& j);

  [[nodiscard]] ImageInfo image_info(const std::string& image_ref) const override;
  [[nodiscard]] std::optional<Mask> segment(const std::string& image_ref,
                                            Point2 start) const override;
  [[nodiscard]] std::vector<Detection> detect(const std::string& image_ref,
                                              const Mask& controlled) const override;
  [[nodiscard]] Refinement refine(const std::string& image_ref,
                                  const Detection& detection) const override;

 private:
  struct NamedMask {
    std::string id;
    Mask mask;
  };
  struct Entry {
    Detection detection;
    std::optional<BBox> refined_bbox;
  };

  void check_ref(const std::string& image_ref) const;
  [[nodiscard]] const Mask* mask_by_id(std::string_view id) const;

  ImageInfo info_;
  std::vector<NamedMask> masks_;
  std::vector<Entry> entries_;
};

struct RemoteOptions {
  std::string url;  // http://host:port
  std::string prompt_template;
  int width = 0;
  int height = 0;
  std::chrono::milliseconds timeout{5000};
};

/// HTTP client for an external perception service.
///   POST /segment  {"image_ref","point":[x,y]}               -> {"rle":[...]} (404: nothing there)
///   POST /perceive {"image_ref","prompt","controlled_mask_rle"} -> {"detections":[...]}
/// Detections may carry "rle" and "refined_bbox"; refinement is applied locally.
class RemoteBackend final : public PerceptionBackend {
 public:
  explicit RemoteBackend(RemoteOptions options);

  [[nodiscard]] ImageInfo image_info(const std::string& image_ref) const override;
  [[nodiscard]] std::optional<Mask> segment(const std::string& image_ref,
                                            Point2 start) const override;
  [[nodiscard]] std::vector<Detection> detect(const std::string& image_ref,
                                              const Mask& controlled) const override;
  [[nodiscard]] Refinement refine(const std::string& image_ref,
                                  const Detection& detection) const override;

 private:
  [[nodiscard]] Json post(const std::string& path, const Json& body, bool allow_404) const;

  RemoteOptions options_;
  std::string host_;
  int port_ = 80;
};

/// Parses `fixture:<path>` or `remote:<url>`. Remote backends take image
/// dimensions from `width`/`height`.
std::unique_ptr<PerceptionBackend> make_backend(std::string_view spec, int width, int height,
                                                std::string prompt_template = {});

/// Mask of the object under the drag start.
/// Throws InvalidArgument (start off image), NotFound (background).
Mask segment_controlled(const PerceptionBackend& backend, const std::string& image_ref,
                        Point2 start);

/// All detections, the controlled object always among them, ordered by
/// descending confidence then bbox x1, y1.
std::vector<Detection> detect_objects(const PerceptionBackend& backend,
                                      const std::string& image_ref, const Mask& controlled_mask);

/// One SceneObject per detection with id `<category>_<rank>`; the controlled
/// object is the one whose mask overlaps `controlled_mask` the most.
ObjectInventory refine_detections(const PerceptionBackend& backend, const std::string& image_ref,
                                  std::span<const Detection> detections,
                                  const Mask& controlled_mask);

/// segment -> detect -> refine.
ObjectInventory perceive(const PerceptionBackend& backend, const std::string& image_ref,
                         Point2 start);

/// Inventory straight from an annotated scene: the controlled object is the
/// smallest object whose mask (or bbox) covers `start`. Throws InvalidDrag.
ObjectInventory inventory_from_scene(const Scene& scene, Point2 start);

}  // namespace cdrag::perception
