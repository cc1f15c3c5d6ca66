#include "cdrag/core/mask.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cdrag {

Mask::Mask(int width, int height, std::vector<Run> runs)
    : width_(width), height_(height), runs_(std::move(runs)) {}

Mask Mask::from_box(int width, int height, const BBox& box) {
  std::vector<Run> runs;
  // Pixel (px, py) covers [px, px+1) x [py, py+1); take pixels whose center is inside.
  const auto lo = [](double v) { return static_cast<std::int64_t>(std::ceil(v - 0.5)); };
  const auto hi = [](double v) { return static_cast<std::int64_t>(std::floor(v - 0.5)); };
  const std::int64_t x0 = std::max<std::int64_t>(0, lo(box.x1));
  const std::int64_t x1 = std::min<std::int64_t>(width - 1, hi(box.x2));
  const std::int64_t y0 = std::max<std::int64_t>(0, lo(box.y1));
  const std::int64_t y1 = std::min<std::int64_t>(height - 1, hi(box.y2));
  if (x0 > x1 || y0 > y1) {
    return Mask(width, height, {});
  }
  for (std::int64_t py = y0; py <= y1; ++py) {
    runs.push_back({py * width + x0, x1 - x0 + 1});
  }
  return Mask(width, height, std::move(runs));
}

Mask Mask::from_flat_rle(int width, int height, const std::vector<std::int64_t>& flat) {
  std::vector<Run> runs;
  runs.reserve(flat.size() / 2);
  for (std::size_t i = 0; i + 1 < flat.size(); i += 2) {
    runs.push_back({flat[i], flat[i + 1]});
  }
  return Mask(width, height, std::move(runs));
}

bool Mask::well_formed() const {
  if (width_ <= 0 || height_ <= 0) {
    return runs_.empty();
  }
  const std::int64_t total = static_cast<std::int64_t>(width_) * height_;
  std::int64_t prev_end = 0;
  for (const Run& r : runs_) {
    if (r.length <= 0 || r.start < prev_end || r.start + r.length > total) {
      return false;
    }
    prev_end = r.start + r.length;
  }
  return true;
}

std::int64_t Mask::pixel_count() const {
  std::int64_t n = 0;
  for (const Run& r : runs_) {
    n += r.length;
  }
  return n;
}

bool Mask::contains_pixel(std::int64_t px, std::int64_t py) const {
  if (px < 0 || py < 0 || px >= width_ || py >= height_) {
    return false;
  }
  const std::int64_t idx = py * width_ + px;
  auto it = std::upper_bound(runs_.begin(), runs_.end(), idx,
                             [](std::int64_t v, const Run& r) { return v < r.start; });
  if (it == runs_.begin()) {
    return false;
  }
  --it;
  return idx < it->start + it->length;
}

bool Mask::contains(const Point2& p) const {
  return contains_pixel(static_cast<std::int64_t>(std::floor(p.x)),
                        static_cast<std::int64_t>(std::floor(p.y)));
}

std::int64_t Mask::overlap(const Mask& other) const {
  std::int64_t total = 0;
  auto a = runs_.begin();
  auto b = other.runs_.begin();
  while (a != runs_.end() && b != other.runs_.end()) {
    const std::int64_t lo = std::max(a->start, b->start);
    const std::int64_t hi = std::min(a->start + a->length, b->start + b->length);
    if (hi > lo) {
      total += hi - lo;
    }
    if (a->start + a->length < b->start + b->length) {
      ++a;
    } else {
      ++b;
    }
  }
  return total;
}

std::optional<BBox> Mask::bounds() const {
  if (runs_.empty() || width_ <= 0) {
    return std::nullopt;
  }
  std::int64_t min_x = width_;
  std::int64_t max_x = -1;
  std::int64_t min_y = height_;
  std::int64_t max_y = -1;
  for (const Run& r : runs_) {
    const std::int64_t first = r.start;
    const std::int64_t last = r.start + r.length - 1;
    const std::int64_t y_first = first / width_;
    const std::int64_t y_last = last / width_;
    min_y = std::min(min_y, y_first);
    max_y = std::max(max_y, y_last);
    if (y_first == y_last) {
      min_x = std::min(min_x, first % width_);
      max_x = std::max(max_x, last % width_);
    } else {
      min_x = 0;
      max_x = width_ - 1;
    }
  }
  return BBox{static_cast<double>(min_x), static_cast<double>(min_y),
              static_cast<double>(max_x + 1), static_cast<double>(max_y + 1)};
}

std::vector<std::int64_t> Mask::flat_rle() const {
  std::vector<std::int64_t> flat;
  flat.reserve(runs_.size() * 2);
  for (const Run& r : runs_) {
    flat.push_back(r.start);
    flat.push_back(r.length);
  }
  return flat;
}

}  // namespace cdrag
