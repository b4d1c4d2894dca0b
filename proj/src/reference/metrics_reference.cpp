#include <algorithm>
#include <cmath>
#include <numeric>

#include "beet/detection_eval.hpp"
#include "beet/error.hpp"
#include "beet/reference.hpp"

namespace beet::reference {

ConfusionTotals confusion(const SemanticMask& pred, const SemanticMask& gt, const BinaryMask* roi) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw ValidationError("confusion: size mismatch");
  }
  ConfusionTotals t;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (roi && !roi->at(x, y)) continue;
      const int g = index_of(gt.at(x, y));
      const int p = index_of(pred.at(x, y));
      ++t.pixels;
      if (g == p) {
        ++t.tp[g];
      } else {
        ++t.fn[g];
        ++t.fp[p];
      }
    }
  }
  return t;
}

double miou_direct(const SemanticMask& pred, const SemanticMask& gt) {
  double sum = 0.0;
  int classes = 0;
  for (SemanticClass c : kAllClasses) {
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (int y = 0; y < gt.height(); ++y) {
      for (int x = 0; x < gt.width(); ++x) {
        const bool p = pred.at(x, y) == c;
        const bool g = gt.at(x, y) == c;
        inter += p && g;
        uni += p || g;
      }
    }
    if (uni == 0) continue;
    sum += static_cast<double>(inter) / static_cast<double>(uni);
    ++classes;
  }
  if (classes == 0) throw ValidationError("no evaluable classes");
  return sum / classes;
}

double dice_loss(const ProbabilityRaster& pred, const SemanticMask& gt, double epsilon) {
  const std::size_t n = pred.plane();
  double total = 0.0;
  int present = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    double inter = 0.0;
    double psum = 0.0;
    double gsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int x = static_cast<int>(i % static_cast<std::size_t>(gt.width()));
      const int y = static_cast<int>(i / static_cast<std::size_t>(gt.width()));
      const double g = index_of(gt.at(x, y)) == c ? 1.0 : 0.0;
      inter += pred.at(c, i) * g;
      psum += pred.at(c, i);
      gsum += g;
    }
    if (gsum == 0.0) continue;
    total += 1.0 - (2.0 * inter + epsilon) / (psum + gsum + epsilon);
    ++present;
  }
  return present ? total / present : 0.0;
}

double ap_by_cutoffs(const ApInput& in, double thr) {
  const std::size_t nd = in.scores.size();
  const std::size_t ng = in.gt_image.size();
  if (ng == 0) return nd == 0 ? 1.0 : 0.0;

  std::vector<std::size_t> rank(nd);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return in.scores[a] > in.scores[b]; });

  std::vector<double> precision(nd);
  std::vector<double> recall(nd);
  for (std::size_t k = 1; k <= nd; ++k) {
    std::vector<bool> used(ng, false);
    std::size_t tp = 0;
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t d = rank[r];
      std::size_t best = ng;
      double best_iou = -1.0;
      for (std::size_t g = 0; g < ng; ++g) {
        if (used[g] || in.gt_image[g] != in.det_image[d]) continue;
        const double v = in.iou(d, g);
        if (v >= thr && v > best_iou) {
          best = g;
          best_iou = v;
        }
      }
      if (best < ng) {
        used[best] = true;
        ++tp;
      }
    }
    precision[k - 1] = static_cast<double>(tp) / static_cast<double>(k);
    recall[k - 1] = static_cast<double>(tp) / static_cast<double>(ng);
  }

  double sum = 0.0;
  for (int j = 0; j < kRecallPoints; ++j) {
    const double r = j / 100.0;
    double best = 0.0;
    for (std::size_t k = 0; k < nd; ++k) {
      if (recall[k] >= r) best = std::max(best, precision[k]);
    }
    sum += best;
  }
  return sum / kRecallPoints;
}

double map_50_95_by_cutoffs(const ApInput& input) {
  double sum = 0.0;
  for (double t : kCocoIouThresholds) sum += ap_by_cutoffs(input, t);
  return sum / static_cast<double>(kCocoIouThresholds.size());
}

}  // namespace beet::reference
