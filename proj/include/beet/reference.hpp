#pragma once

// Deliberately naive serial versions of the hot kernels. The tests compare
// the optimized code against these; bench/ times them as the baseline.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "beet/mask.hpp"
#include "beet/metrics.hpp"
#include "beet/types.hpp"

namespace beet::reference {

/// Point-in-polygon test of every pixel center against every region.
SemanticMask rasterize(std::span<const AnnotatedRegion> regions, int width, int height);
BinaryMask rasterize_polygon(std::span<const Point> ring, int width, int height);
bool center_inside(std::span<const Point> ring, double px, double py);

ConfusionTotals confusion(const SemanticMask& pred, const SemanticMask& gt,
                          const BinaryMask* roi = nullptr);

/// Class IoUs straight from the two masks: |P and G| / |P or G| per class,
/// classes with an empty union skipped. Returns the mean.
double miou_direct(const SemanticMask& pred, const SemanticMask& gt);

double dice_loss(const ProbabilityRaster& pred, const SemanticMask& gt, double epsilon);

/// Single-class detection problem given as plain arrays.
struct ApInput {
  std::vector<double> scores;
  std::vector<std::size_t> det_image;
  std::vector<std::size_t> gt_image;
  std::function<double(std::size_t det, std::size_t gt)> iou;
};

/// AP from scratch at every confidence cutoff: for each k the top-k
/// detections are matched again and precision/recall recounted; the
/// interpolated precision at recall r is the best precision among cutoffs
/// reaching r.
double ap_by_cutoffs(const ApInput& input, double iou_threshold);
double map_50_95_by_cutoffs(const ApInput& input);

}  // namespace beet::reference
