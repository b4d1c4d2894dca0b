#include "beet/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "beet/error.hpp"

namespace beet {
namespace {

struct RingSpan {
  std::span<const Point> ring;
  std::uint8_t value;
  int y_begin;
  int y_end;  // exclusive
};

// Crossing of the scan line y = py with edge (a, b), endpoints ordered by y so
// that reversed copies of one edge produce bit-identical crossings.
inline bool crossing(Point a, Point b, double py, double& x_out) {
  if ((a.y > py) == (b.y > py)) return false;
  if (b.y < a.y) std::swap(a, b);
  x_out = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
  return true;
}

void collect_crossings(std::span<const Point> ring, double py, std::vector<double>& xs) {
  xs.clear();
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    double x = 0.0;
    if (crossing(ring[j], ring[i], py, x)) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
}

template <typename Paint>
void for_each_span(const std::vector<double>& xs, int width, Paint&& paint) {
  for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
    const double lo = std::ceil(xs[k] - 0.5);
    const double hi = std::ceil(xs[k + 1] - 0.5);
    const int begin = static_cast<int>(std::clamp(lo, 0.0, static_cast<double>(width)));
    const int end = static_cast<int>(std::clamp(hi, 0.0, static_cast<double>(width)));
    if (begin < end) paint(begin, end);
  }
}

std::pair<int, int> row_range(std::span<const Point> ring, int height) {
  const AxisAlignedBox box = bounding_box(ring);
  // Rows whose centers can fall inside [y_min, y_max].
  const double lo = std::floor(box.y_min - 0.5);
  const double hi = std::ceil(box.y_max - 0.5) + 1.0;
  const int begin = static_cast<int>(std::clamp(lo, 0.0, static_cast<double>(height)));
  const int end = static_cast<int>(std::clamp(hi, 0.0, static_cast<double>(height)));
  return {begin, end};
}

}  // namespace

int class_priority(SemanticClass c) {
  switch (c) {
    case SemanticClass::Bg: return 0;
    case SemanticClass::Beet: return 1;
    case SemanticClass::Soil: return 2;
    case SemanticClass::Leaf: return 3;
    case SemanticClass::Cut: return 4;
    case SemanticClass::Dmg: return 5;
    case SemanticClass::Rot: return 6;
  }
  return 0;
}

SemanticMask rasterize(std::span<const AnnotatedRegion> regions, int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("rasterize: canvas must be positive");
  SemanticMask mask(width, height);

  std::vector<RingSpan> order;
  order.reserve(regions.size());
  for (const AnnotatedRegion& r : regions) {
    const auto [yb, ye] = row_range(r.polygon.vertices(), height);
    if (yb < ye) {
      order.push_back({r.polygon.vertices(), static_cast<std::uint8_t>(r.cls), yb, ye});
    }
  }
  std::stable_sort(order.begin(), order.end(), [](const RingSpan& a, const RingSpan& b) {
    return class_priority(class_from_index(a.value)) < class_priority(class_from_index(b.value));
  });

  std::uint8_t* cells = mask.mutable_cells().data();
#pragma omp parallel
  {
    std::vector<double> xs;
#pragma omp for schedule(dynamic, 16)
    for (int y = 0; y < height; ++y) {
      std::uint8_t* row = cells + static_cast<std::size_t>(y) * width;
      const double py = y + 0.5;
      for (const RingSpan& r : order) {
        if (y < r.y_begin || y >= r.y_end) continue;
        collect_crossings(r.ring, py, xs);
        for_each_span(xs, width, [&](int b, int e) { std::fill(row + b, row + e, r.value); });
      }
    }
  }
  return mask;
}

BinaryMask rasterize_polygon(std::span<const Point> ring, int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("rasterize: canvas must be positive");
  BinaryMask mask(width, height);
  if (ring.size() < 3) return mask;
  const auto [yb, ye] = row_range(ring, height);
  std::uint8_t* cells = mask.mutable_cells().data();
#pragma omp parallel
  {
    std::vector<double> xs;
#pragma omp for schedule(dynamic, 16)
    for (int y = yb; y < ye; ++y) {
      std::uint8_t* row = cells + static_cast<std::size_t>(y) * width;
      collect_crossings(ring, y + 0.5, xs);
      for_each_span(xs, width, [&](int b, int e) { std::fill(row + b, row + e, 1); });
    }
  }
  return mask;
}

BinaryMask rasterize_polygon(const Polygon& polygon, int width, int height) {
  return rasterize_polygon(polygon.vertices(), width, height);
}

std::optional<AxisAlignedBox> mask_bounds(const BinaryMask& mask) {
  int x0 = mask.width();
  int y0 = mask.height();
  int x1 = -1;
  int y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return AxisAlignedBox{static_cast<double>(x0), static_cast<double>(y0),
                        static_cast<double>(x1 + 1), static_cast<double>(y1 + 1)};
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> outside(mask.pixel_count(), 0);
  std::deque<std::pair<int, int>> queue;
  auto seed = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    if (!mask.at(x, y) && !outside[i]) {
      outside[i] = 1;
      queue.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if ((dx || dy) && mask.contains(nx, ny)) seed(nx, ny);
      }
    }
  }
  BinaryMask out(w, h);
  auto dst = out.mutable_cells();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = outside[i] ? 0 : 1;
  return out;
}

std::vector<BinaryMask> connected_components(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(mask.pixel_count(), -1);
  std::vector<BinaryMask> out;
  std::deque<std::pair<int, int>> queue;
  constexpr std::array<std::pair<int, int>, 4> kNeighbors = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!mask.at(x, y) || label[i] >= 0) continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back(w, h);
      BinaryMask& comp = out.back();
      label[i] = id;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        comp.set(cx, cy, true);
        for (const auto& [dx, dy] : kNeighbors) {
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (!mask.contains(nx, ny) || !mask.at(nx, ny)) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
          if (label[j] >= 0) continue;
          label[j] = id;
          queue.emplace_back(nx, ny);
        }
      }
    }
  }
  return out;
}

}  // namespace beet
