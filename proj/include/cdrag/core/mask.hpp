#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cdrag/core/geometry.hpp"

namespace cdrag {

/// One foreground span over row-major pixel indices [start, start + length).
struct Run {
  std::int64_t start = 0;
  std::int64_t length = 0;

  friend constexpr bool operator==(const Run&, const Run&) = default;
};

/// Run-length encoded binary mask. Construction does not validate; call
/// well_formed() (or validate_scene) to check the run invariants.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, std::vector<Run> runs);

  /// Rasterizes a box: pixel (px, py) is foreground when its center lies in the box.
  static Mask from_box(int width, int height, const BBox& box);
  /// Inverse of flat_rle(): [start0, len0, start1, len1, ...].
  static Mask from_flat_rle(int width, int height, const std::vector<std::int64_t>& flat);

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] const std::vector<Run>& runs() const { return runs_; }
  [[nodiscard]] bool empty() const { return runs_.empty(); }
  [[nodiscard]] bool well_formed() const;

  [[nodiscard]] std::int64_t pixel_count() const;
  [[nodiscard]] bool contains_pixel(std::int64_t px, std::int64_t py) const;
  [[nodiscard]] bool contains(const Point2& p) const;
  /// Number of pixels foreground in both masks. Masks must share dimensions.
  [[nodiscard]] std::int64_t overlap(const Mask& other) const;
  /// Tight pixel-edge bounds of the foreground, nullopt for an empty mask.
  [[nodiscard]] std::optional<BBox> bounds() const;
  [[nodiscard]] std::vector<std::int64_t> flat_rle() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Run> runs_;
};

}  // namespace cdrag
