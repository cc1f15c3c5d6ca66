#pragma once

#include <algorithm>
#include <cmath>

namespace cdrag {

/// 2D vector in image coordinates: origin top-left, y grows downward.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

using Point2 = Vec2;

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Axis-aligned box (x1, y1) top-left, (x2, y2) bottom-right, in pixels.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  [[nodiscard]] constexpr double width() const { return x2 - x1; }
  [[nodiscard]] constexpr double height() const { return y2 - y1; }
  [[nodiscard]] constexpr double area() const { return width() * height(); }
  [[nodiscard]] constexpr Point2 center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
  [[nodiscard]] constexpr bool is_valid() const { return x1 < x2 && y1 < y2; }
  [[nodiscard]] constexpr bool contains(const Point2& p) const {
    return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2;
  }
  [[nodiscard]] constexpr BBox dilated(double d) const { return {x1 - d, y1 - d, x2 + d, y2 + d}; }
  [[nodiscard]] bool is_finite() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2);
  }

  friend constexpr bool operator==(const BBox&, const BBox&) = default;
};

/// Euclidean distance between two boxes; 0 when they touch or overlap.
inline double box_gap(const BBox& a, const BBox& b) {
  const double dx = std::max({0.0, b.x1 - a.x2, a.x1 - b.x2});
  const double dy = std::max({0.0, b.y1 - a.y2, a.y1 - b.y2});
  return std::hypot(dx, dy);
}

struct Segment {
  Point2 a;
  Point2 b;

  [[nodiscard]] double length() const { return distance(a, b); }
  friend constexpr bool operator==(const Segment&, const Segment&) = default;
};

}  // namespace cdrag
