#include <algorithm>
#include <utility>

#include "beet/error.hpp"
#include "beet/raster.hpp"
#include "beet/reference.hpp"

namespace beet::reference {

bool center_inside(std::span<const Point> ring, double px, double py) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Point a = ring[j];
    Point b = ring[i];
    if ((a.y > py) == (b.y > py)) continue;
    if (b.y < a.y) std::swap(a, b);
    const double x = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
    if (x > px) inside = !inside;
  }
  return inside;
}

BinaryMask rasterize_polygon(std::span<const Point> ring, int width, int height) {
  BinaryMask mask(width, height);
  if (ring.size() < 3) return mask;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (center_inside(ring, x + 0.5, y + 0.5)) mask.set(x, y, true);
    }
  }
  return mask;
}

SemanticMask rasterize(std::span<const AnnotatedRegion> regions, int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("rasterize: canvas must be positive");
  SemanticMask mask(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int best = -1;
      SemanticClass cls = SemanticClass::Bg;
      for (const AnnotatedRegion& r : regions) {
        const int p = class_priority(r.cls);
        if (p < best) continue;
        if (center_inside(r.polygon.vertices(), x + 0.5, y + 0.5)) {
          best = p;
          cls = r.cls;
        }
      }
      mask.set(x, y, cls);
    }
  }
  return mask;
}

}  // namespace beet::reference
