#pragma once

// Test-only scene generators and brute-force oracles. Nothing here is used
// by the library itself.

#include <cstdint>
#include <random>
#include <vector>

#include "beet/detection_eval.hpp"
#include "beet/geometry.hpp"
#include "beet/mask.hpp"
#include "beet/reference.hpp"
#include "beet/types.hpp"

namespace beet::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive

/// Star-shaped (hence simple) polygon around `center` with n vertices at
/// sorted random angles and radii in [r_min, r_max].
std::vector<Point> random_star(Rng& rng, Point center, double r_min, double r_max, int n);

/// Axis-aligned rectangle as a counter-clockwise ring (y down).
std::vector<Point> rect_ring(double x0, double y0, double x1, double y1);

OrientedBox random_obb(Rng& rng, double extent);
AxisAlignedBox random_box(Rng& rng, double extent);

SemanticMask random_mask(Rng& rng, int width, int height, int classes_used = kNumClasses);

// ---- oracles --------------------------------------------------------------

/// IoU of two oriented boxes by sampling an n x n grid of pixel centers over
/// their joint bounding square.
double raster_obb_iou(const OrientedBox& a, const OrientedBox& b, int n);

/// Area by uniform sampling over the bounding box.
double monte_carlo_area(const std::vector<Point>& ring, int samples, Rng& rng);

/// Background not 8-connected to the border becomes foreground (plain BFS).
BinaryMask flood_fill_holes(const BinaryMask& mask);

/// OR of the region masks reachable from `seed` through pixel overlap,
/// holes filled. Masks are computed by the serial reference rasterizer.
BinaryMask overlap_union(const std::vector<std::vector<Point>>& rings, std::size_t seed,
                         int width, int height);

// ---- detection scenes ---------------------------------------------------

template <typename G>
struct DetectionScene {
  std::vector<Detection<G>> dets;
  std::vector<GroundTruth<G>> gts;
};

/// Single-label scene over `images` images: ground truths from `make`, one
/// perturbed detection for most of them (`perturb`), plus false positives.
/// Scores are sometimes quantized so that ties occur.
template <typename G, typename Make, typename Perturb>
DetectionScene<G> random_detection_scene(Rng& rng, int images, Make&& make, Perturb&& perturb) {
  DetectionScene<G> s;
  const bool coarse = uniform_int(rng, 0, 2) == 0;
  auto score = [&] {
    const double v = uniform(rng, 0.0, 1.0);
    return coarse ? static_cast<int>(v * 5) / 5.0 : v;
  };
  for (int i = 0; i < images; ++i) {
    const auto img = static_cast<std::size_t>(i);
    const int n = uniform_int(rng, 0, 6);
    for (int k = 0; k < n; ++k) {
      s.gts.push_back({make(rng), 0, img});
      if (uniform_int(rng, 0, 4) > 0) s.dets.push_back({perturb(rng, s.gts.back().geometry), 0, score(), img});
      if (uniform_int(rng, 0, 5) == 0) s.dets.push_back({perturb(rng, s.gts.back().geometry), 0, score(), img});
    }
    const int fp = uniform_int(rng, 0, 3);
    for (int k = 0; k < fp; ++k) s.dets.push_back({make(rng), 0, score(), img});
  }
  return s;
}

template <typename G, typename Iou>
reference::ApInput ap_input(const DetectionScene<G>& s, Iou iou) {
  reference::ApInput in;
  for (const auto& d : s.dets) {
    in.scores.push_back(d.score);
    in.det_image.push_back(d.image);
  }
  for (const auto& g : s.gts) in.gt_image.push_back(g.image);
  in.iou = [&s, iou](std::size_t d, std::size_t g) {
    return iou(s.dets[d].geometry, s.gts[g].geometry);
  };
  return in;
}

AxisAlignedBox perturb_box(Rng& rng, const AxisAlignedBox& b);
OrientedBox perturb_obb(Rng& rng, const OrientedBox& b);
/// Filled box raster on a width x height canvas (at least one pixel).
BinaryMask box_mask(const AxisAlignedBox& b, int width, int height);

// ---- datasets -------------------------------------------------------------

/// One recording session row: stage, meta and image/beet counts.
struct SessionSpec {
  int id;
  int images;
  int beets;
  Lighting lighting;
  Moisture moisture;
  Stage stage;
  std::vector<std::string> locations;  // images alternate between these
  bool ruler;
  bool sign;
};

/// The ten published recording sessions.
std::vector<SessionSpec> published_sessions();

/// Minimal annotations (one small Beet rectangle per beet) realizing the
/// given sessions exactly.
std::vector<AnnotatedImage> dataset_from_sessions(const std::vector<SessionSpec>& sessions);

/// Random images with group ids for split tests.
std::vector<AnnotatedImage> random_grouped_dataset(Rng& rng, int max_images);

/// Scenes for end-to-end runs: non-overlapping beets with inner defect
/// regions, occasional Leaf, and a marker. Some images carry a beet whose
/// pixel bounds are exactly 1056 wide so that its large-tier crop has scale 1.
std::vector<AnnotatedImage> inspection_scenes(int count, std::uint64_t seed);

}  // namespace beet::testing
