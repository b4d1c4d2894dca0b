#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "beet/error.hpp"
#include "beet/parallel.hpp"

namespace beet {

// COCO-style average precision: detections are ranked by descending score
// (ties keep input order), each is greedily matched to the unmatched ground
// truth of the same image with the highest IoU at or above the threshold, and
// AP is the mean interpolated precision at recall 0, 0.01, ..., 1.00. No area
// ranges and no per-image detection cap.

inline constexpr int kRecallPoints = 101;
inline constexpr std::array<double, 10> kCocoIouThresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                                              0.75, 0.80, 0.85, 0.90, 0.95};

template <typename Geometry>
struct Detection {
  Geometry geometry;
  int label = 0;
  double score = 0.0;
  std::size_t image = 0;
};

template <typename Geometry>
struct GroundTruth {
  Geometry geometry;
  int label = 0;
  std::size_t image = 0;
};

struct MatchCandidate {
  std::size_t gt = 0;
  double iou = 0.0;
};

/// One class worth of detections with their IoUs against same-image ground
/// truths, computed once and reused across thresholds.
struct DetectionProblem {
  std::vector<double> scores;
  std::vector<std::vector<MatchCandidate>> candidates;  // per detection
  std::size_t num_gts = 0;
};

struct PRCurve {
  std::vector<double> recall;     // one point per ranked detection
  std::vector<double> precision;
  std::array<double, kRecallPoints> interpolated{};
  double ap = 0.0;
};

/// Throws ValidationError for a threshold outside (0, 1] or a score outside [0, 1].
PRCurve pr_curve(const DetectionProblem& problem, double iou_threshold);
double average_precision(const DetectionProblem& problem, double iou_threshold);
/// Mean AP over kCocoIouThresholds.
double map_50_95(const DetectionProblem& problem);

template <typename Geometry, typename IouFn>
DetectionProblem build_problem(std::span<const Detection<Geometry>> dets,
                               std::span<const GroundTruth<Geometry>> gts, IouFn&& iou,
                               std::optional<int> label = std::nullopt) {
  std::vector<std::size_t> det_index;
  std::vector<std::size_t> gt_index;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!label || dets[i].label == *label) det_index.push_back(i);
  }
  for (std::size_t j = 0; j < gts.size(); ++j) {
    if (!label || gts[j].label == *label) gt_index.push_back(j);
  }
  DetectionProblem problem;
  problem.num_gts = gt_index.size();
  problem.scores.resize(det_index.size());
  problem.candidates.resize(det_index.size());
  parallel_for(det_index.size(), [&](std::size_t k) {
    const auto& det = dets[det_index[k]];
    problem.scores[k] = det.score;
    for (std::size_t m = 0; m < gt_index.size(); ++m) {
      const auto& gt = gts[gt_index[m]];
      if (gt.image != det.image) continue;
      const double value = iou(det.geometry, gt.geometry);
      if (value > 0.0) problem.candidates[k].push_back({m, value});
    }
  });
  return problem;
}

/// Single-class AP; labels are ignored.
template <typename Geometry, typename IouFn>
double average_precision(std::span<const Detection<Geometry>> dets,
                         std::span<const GroundTruth<Geometry>> gts, double iou_threshold,
                         IouFn&& iou) {
  return average_precision(build_problem(dets, gts, iou), iou_threshold);
}

struct ClassAp {
  int label = 0;
  std::array<double, kCocoIouThresholds.size()> ap{};  // per threshold
  double map = 0.0;                                     // mean over thresholds
};

struct MapResult {
  std::vector<ClassAp> per_class;  // ascending label
  double map = 0.0;                // mean over classes
};

/// Per-class mAP50-95 averaged over every label seen in dets or gts. Empty
/// inputs give map 1.0 (nothing to find, nothing falsely found).
template <typename Geometry, typename IouFn>
MapResult evaluate_map(std::span<const Detection<Geometry>> dets,
                       std::span<const GroundTruth<Geometry>> gts, IouFn&& iou) {
  std::set<int> labels;
  for (const auto& d : dets) labels.insert(d.label);
  for (const auto& g : gts) labels.insert(g.label);
  MapResult result;
  if (labels.empty()) {
    result.map = 1.0;
    return result;
  }
  double sum = 0.0;
  for (int label : labels) {
    const DetectionProblem problem = build_problem(dets, gts, iou, label);
    ClassAp entry;
    entry.label = label;
    double class_sum = 0.0;
    for (std::size_t t = 0; t < kCocoIouThresholds.size(); ++t) {
      entry.ap[t] = average_precision(problem, kCocoIouThresholds[t]);
      class_sum += entry.ap[t];
    }
    entry.map = class_sum / static_cast<double>(kCocoIouThresholds.size());
    sum += entry.map;
    result.per_class.push_back(entry);
  }
  result.map = sum / static_cast<double>(labels.size());
  return result;
}

template <typename Geometry, typename IouFn>
double map_50_95(std::span<const Detection<Geometry>> dets,
                 std::span<const GroundTruth<Geometry>> gts, IouFn&& iou) {
  return evaluate_map(dets, gts, iou).map;
}

/// rank,recall,precision rows followed by the 101 interpolated points.
std::string pr_curve_csv(const PRCurve& curve);

}  // namespace beet
