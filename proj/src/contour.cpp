#include <array>
#include <cmath>

#include "beet/error.hpp"
#include "beet/raster.hpp"

namespace beet {
namespace {

// Directions on the pixel-corner lattice (y down): E, S, W, N. Index + 1 is a
// clockwise (right) turn on screen.
constexpr std::array<int, 4> kDx = {1, 0, -1, 0};
constexpr std::array<int, 4> kDy = {0, 1, 0, -1};

bool fg(const BinaryMask& m, int x, int y) { return m.contains(x, y) && m.at(x, y); }

// Pixel ahead of corner (cx, cy) when heading `d`, on the right (+1) or left (-1).
std::pair<int, int> ahead_pixel(int cx, int cy, int d, int side) {
  const int r = (d + (side > 0 ? 1 : 3)) % 4;
  // Pixel containing corner + d/2 + side_dir/2; its index is the floor.
  const int px2 = 2 * cx + kDx[d] + kDx[r];
  const int py2 = 2 * cy + kDy[d] + kDy[r];
  return {static_cast<int>(std::floor(px2 / 2.0)), static_cast<int>(std::floor(py2 / 2.0))};
}

// Crack-following trace of one 4-connected component's outer boundary with the
// foreground kept on the right. Returns corner vertices where the path turns.
std::vector<Point> trace_component(const BinaryMask& comp) {
  int sx = -1;
  int sy = -1;
  for (int y = 0; y < comp.height() && sx < 0; ++y) {
    for (int x = 0; x < comp.width(); ++x) {
      if (comp.at(x, y)) {
        sx = x;
        sy = y;
        break;
      }
    }
  }
  std::vector<Point> out;
  if (sx < 0) return out;

  int cx = sx;
  int cy = sy;
  int d = 0;  // heading E along the top edge of the start pixel
  const int start_d = d;
  out.push_back({static_cast<double>(cx), static_cast<double>(cy)});
  const std::size_t limit = 4 * (comp.pixel_count() + 4) + 16;
  for (std::size_t steps = 0;; ++steps) {
    if (steps > limit) throw Error("contour trace did not terminate");
    cx += kDx[d];
    cy += kDy[d];
    const auto [rx, ry] = ahead_pixel(cx, cy, d, +1);
    const auto [lx, ly] = ahead_pixel(cx, cy, d, -1);
    int nd = d;
    if (fg(comp, rx, ry)) {
      if (fg(comp, lx, ly)) nd = (d + 3) % 4;  // left
    } else {
      nd = (d + 1) % 4;  // right
    }
    if (cx == sx && cy == sy && nd == start_d) break;
    if (nd != d) out.push_back({static_cast<double>(cx), static_cast<double>(cy)});
    d = nd;
  }
  return out;
}

}  // namespace

std::optional<Polygon> trace_outer_contour(const BinaryMask& mask) {
  const BinaryMask filled = fill_holes(mask);
  const std::vector<BinaryMask> comps = connected_components(filled);
  if (comps.empty()) return std::nullopt;

  std::vector<Point> ring = trace_component(comps.front());
  const Point anchor = ring.front();
  for (std::size_t i = 1; i < comps.size(); ++i) {
    // Out-and-back bridge from the anchor; both traversals cancel under even-odd.
    const std::vector<Point> part = trace_component(comps[i]);
    ring.push_back(anchor);
    ring.insert(ring.end(), part.begin(), part.end());
    ring.push_back(part.front());
  }
  return Polygon(std::move(ring));
}

}  // namespace beet
