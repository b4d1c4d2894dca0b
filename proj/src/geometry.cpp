#include "beet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beet/error.hpp"

namespace beet {
namespace {

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
Point sub(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<Point> ccw(std::span<const Point> ring) {
  std::vector<Point> out(ring.begin(), ring.end());
  if (signed_area2(out) < 0.0) std::reverse(out.begin(), out.end());
  return out;
}

double wrap_angle(double angle, double period) {
  double a = std::fmod(angle, period);
  if (a < 0.0) a += period;
  if (a >= period) a = 0.0;
  return a;
}

}  // namespace

OrientedBox::OrientedBox(Point center, double width, double height, double angle)
    : center_(center), width_(width), height_(height), angle_(angle) {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
    throw ValidationError("oriented box needs positive finite width and height");
  }
  if (!std::isfinite(angle) || !std::isfinite(center.x) || !std::isfinite(center.y)) {
    throw ValidationError("oriented box has a non-finite center or angle");
  }
  if (width_ < height_) {
    std::swap(width_, height_);
    angle_ += kPi / 2.0;
  }
  angle_ = wrap_angle(angle_, width_ == height_ ? kPi / 2.0 : kPi);
}

std::array<Point, 4> OrientedBox::corners() const {
  const double c = std::cos(angle_);
  const double s = std::sin(angle_);
  const double hw = width_ / 2.0;
  const double hh = height_ / 2.0;
  auto at = [&](double u, double v) {
    return Point{center_.x + u * c - v * s, center_.y + u * s + v * c};
  };
  return {at(-hw, -hh), at(hw, -hh), at(hw, hh), at(-hw, hh)};
}

double polygon_area(std::span<const Point> ring) {
  if (ring.size() < 3) return 0.0;
  return std::abs(signed_area2(ring)) / 2.0;
}

AxisAlignedBox bounding_box(std::span<const Point> points) {
  AxisAlignedBox box{std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
  for (const Point& p : points) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

double aabb_iou(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> clip) {
  std::vector<Point> output = ccw(subject);
  const std::vector<Point> window = ccw(clip);
  const std::size_t m = window.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Point a = window[e];
    const Point edge = sub(window[(e + 1) % m], a);
    std::vector<Point> input;
    input.swap(output);
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point p = input[i];
      const Point q = input[(i + 1) % n];
      const double cp = cross(edge, sub(p, a));
      const double cq = cross(edge, sub(q, a));
      const bool p_in = cp >= 0.0;
      const bool q_in = cq >= 0.0;
      if (p_in) output.push_back(p);
      if (p_in != q_in) {
        const double t = cp / (cp - cq);
        output.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
  }
  if (output.size() < 3) output.clear();
  return output;
}

double obb_iou(const OrientedBox& a, const OrientedBox& b) {
  if (a == b) return 1.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::vector<Point> inter = clip_convex(ca, cb);
  const double inter_area = polygon_area(inter);
  if (inter_area <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter_area;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter_area / uni, 0.0, 1.0);
}

OrientedBox obb_from_corners(const std::array<Point, 4>& corners) {
  // Reuses the marker invariants: convex, non-degenerate.
  MarkerAnnotation checked(MarkerClass::Ruler, corners);
  (void)checked;

  double best_area = std::numeric_limits<double>::infinity();
  OrientedBox best;
  for (int i = 0; i < 4; ++i) {
    const Point a = corners[i];
    const Point b = corners[(i + 1) % 4];
    const double len = dist(a, b);
    const Point u{(b.x - a.x) / len, (b.y - a.y) / len};
    const Point v{-u.y, u.x};
    double u_min = std::numeric_limits<double>::infinity();
    double u_max = -u_min;
    double v_min = u_min;
    double v_max = -u_min;
    for (const Point& p : corners) {
      const double pu = p.x * u.x + p.y * u.y;
      const double pv = p.x * v.x + p.y * v.y;
      u_min = std::min(u_min, pu);
      u_max = std::max(u_max, pu);
      v_min = std::min(v_min, pv);
      v_max = std::max(v_max, pv);
    }
    const double area = (u_max - u_min) * (v_max - v_min);
    if (area < best_area) {
      best_area = area;
      const double cu = (u_min + u_max) / 2.0;
      const double cv = (v_min + v_max) / 2.0;
      const Point center{cu * u.x + cv * v.x, cu * u.y + cv * v.y};
      best = OrientedBox(center, u_max - u_min, v_max - v_min, std::atan2(u.y, u.x));
    }
  }
  return best;
}

ScaleEstimate estimate_scale(const MarkerAnnotation& marker, PhysicalSize physical) {
  if (!(physical.length_mm > 0.0) || !(physical.width_mm > 0.0)) {
    throw ValidationError("marker physical dimensions must be positive");
  }
  const auto& c = marker.corners();
  std::array<double, 4> side{};
  for (int i = 0; i < 4; ++i) {
    side[i] = dist(c[i], c[(i + 1) % 4]);
    if (side[i] <= 1.0) {
      throw ValidationError("marker too small: a side measures " + std::to_string(side[i]) +
                            " px");
    }
  }
  const double long_mm = std::max(physical.length_mm, physical.width_mm);
  const double short_mm = std::min(physical.length_mm, physical.width_mm);
  // Sides 0/2 and 1/3 are opposite.
  const bool even_is_long = side[0] + side[2] >= side[1] + side[3];
  std::array<double, 4> ratio{};
  for (int i = 0; i < 4; ++i) {
    const bool is_long = (i % 2 == 0) == even_is_long;
    ratio[i] = (is_long ? long_mm : short_mm) / side[i];
  }
  const double mean = (ratio[0] + ratio[1] + ratio[2] + ratio[3]) / 4.0;
  double residual = 0.0;
  for (double r : ratio) residual = std::max(residual, std::abs(r - mean) / mean);
  return ScaleEstimate{mean, marker.marker_class(), residual};
}

}  // namespace beet
