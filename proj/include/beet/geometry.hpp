#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "beet/mask.hpp"
#include "beet/types.hpp"

namespace beet {

inline constexpr double kPi = 3.14159265358979323846;

struct AxisAlignedBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  bool valid() const noexcept { return x_min < x_max && y_min < y_max; }

  friend bool operator==(const AxisAlignedBox&, const AxisAlignedBox&) = default;
};

/// Rotated rectangle with width >= height and angle in [0, pi) measured from
/// the +x axis to the width side (y downward, so positive is clockwise on screen).
/// Squares use [0, pi/2).
class OrientedBox {
 public:
  OrientedBox() = default;
  /// Canonicalizes (swaps sides, wraps the angle). Throws ValidationError
  /// for non-positive or non-finite sizes.
  OrientedBox(Point center, double width, double height, double angle);

  Point center() const noexcept { return center_; }
  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }
  double angle() const noexcept { return angle_; }
  double area() const noexcept { return width_ * height_; }

  /// Corners in a consistent winding order, starting at (-w/2, -h/2) in the box frame.
  std::array<Point, 4> corners() const;

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;

 private:
  Point center_{};
  double width_ = 1.0;
  double height_ = 1.0;
  double angle_ = 0.0;
};

struct ScaleEstimate {
  double mm_per_pixel = 0.0;
  MarkerClass source = MarkerClass::Ruler;
  double residual = 0.0;
};

struct PhysicalSize {
  double length_mm = 0.0;
  double width_mm = 0.0;
};

double polygon_area(std::span<const Point> ring);
inline double polygon_area(const Polygon& p) { return polygon_area(p.vertices()); }

/// Tight box around the vertices.
AxisAlignedBox bounding_box(std::span<const Point> points);

double aabb_iou(const AxisAlignedBox& a, const AxisAlignedBox& b);

/// Sutherland-Hodgman clip of a convex subject against a convex clip polygon.
/// Either winding is accepted; the result is counter-clockwise (positive
/// signed_area2) or empty.
std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> clip);

double obb_iou(const OrientedBox& a, const OrientedBox& b);

/// Minimum-area enclosing rectangle of a convex quadrilateral, found by
/// testing every hull edge direction. Throws ValidationError when degenerate.
OrientedBox obb_from_corners(const std::array<Point, 4>& corners);

/// Scale from a marker of known physical size. Opposite sides are paired and
/// the pair with the longer mean pixel length is matched with length_mm.
/// Throws ValidationError for non-positive physical sizes or any pixel side <= 1 px.
ScaleEstimate estimate_scale(const MarkerAnnotation& marker, PhysicalSize physical);

inline double mask_area_mm2(double pixel_area, const ScaleEstimate& scale) {
  return pixel_area * scale.mm_per_pixel * scale.mm_per_pixel;
}

}  // namespace beet
