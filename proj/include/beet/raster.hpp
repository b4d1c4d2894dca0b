#pragma once

#include <optional>
#include <span>
#include <vector>

#include "beet/geometry.hpp"
#include "beet/mask.hpp"
#include "beet/types.hpp"

namespace beet {

// Pixel (x, y) is covered by a polygon when its center (x + 0.5, y + 0.5) is
// inside under the even-odd rule. A center lying exactly on an edge follows
// the half-open crossing convention: edges count when one endpoint is
// strictly below the scan line and the other is at or above it, and a center
// is inside when an odd number of crossings lie strictly to its right.

/// Overlap priority, lowest first: Beet, Soil, Leaf, Cut, Dmg, Rot.
int class_priority(SemanticClass c);

/// Paints regions in priority order onto a Bg canvas. Rows are processed in
/// parallel; the result does not depend on the thread count.
SemanticMask rasterize(std::span<const AnnotatedRegion> regions, int width, int height);

/// Coverage of a single ring (or several rings under one even-odd fill).
BinaryMask rasterize_polygon(std::span<const Point> ring, int width, int height);
BinaryMask rasterize_polygon(const Polygon& polygon, int width, int height);

/// Pixel bounds [x_min, x_max) x [y_min, y_max) of the set pixels, or nullopt.
std::optional<AxisAlignedBox> mask_bounds(const BinaryMask& mask);

/// Background pixels not 8-connected to the image border become foreground.
BinaryMask fill_holes(const BinaryMask& mask);

/// 4-connected components, each returned as its own mask.
std::vector<BinaryMask> connected_components(const BinaryMask& mask);

/// Outer boundary of a mask as a polygon along pixel edges, with integer
/// vertices at pixel corners and collinear vertices removed. Foreground is
/// 4-connected. Multiple components are joined by zero-width bridges so
/// the even-odd rasterization of the result equals fill_holes(mask).
/// Returns nullopt for an empty mask.
std::optional<Polygon> trace_outer_contour(const BinaryMask& mask);

}  // namespace beet
