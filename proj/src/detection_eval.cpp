#include "beet/detection_eval.hpp"

#include <numeric>
#include <sstream>

namespace beet {

PRCurve pr_curve(const DetectionProblem& problem, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("IoU threshold must lie in (0, 1]");
  }
  const std::size_t n = problem.scores.size();
  for (double s : problem.scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("detection score outside [0, 1]");
  }
  PRCurve curve;
  if (problem.num_gts == 0) {
    curve.ap = n == 0 ? 1.0 : 0.0;
    curve.interpolated.fill(curve.ap);
    curve.precision.assign(n, 0.0);
    curve.recall.assign(n, 0.0);
    return curve;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return problem.scores[a] > problem.scores[b];
  });

  std::vector<bool> taken(problem.num_gts, false);
  std::size_t tp = 0;
  curve.recall.reserve(n);
  curve.precision.reserve(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    const auto& cands = problem.candidates[order[rank]];
    std::size_t best = problem.num_gts;
    double best_iou = iou_threshold;
    for (const MatchCandidate& c : cands) {
      if (taken[c.gt] || c.iou < iou_threshold) continue;
      if (best == problem.num_gts || c.iou > best_iou || (c.iou == best_iou && c.gt < best)) {
        best = c.gt;
        best_iou = c.iou;
      }
    }
    if (best != problem.num_gts) {
      taken[best] = true;
      ++tp;
    }
    curve.recall.push_back(static_cast<double>(tp) / static_cast<double>(problem.num_gts));
    curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
  }

  // Precision envelope, then sample at the fixed recall points.
  std::vector<double> envelope = curve.precision;
  for (std::size_t i = envelope.size(); i > 1; --i) {
    envelope[i - 2] = std::max(envelope[i - 2], envelope[i - 1]);
  }
  double sum = 0.0;
  std::size_t k = 0;
  for (int j = 0; j < kRecallPoints; ++j) {
    const double r = j / 100.0;
    while (k < n && curve.recall[k] < r) ++k;
    curve.interpolated[j] = k < n ? envelope[k] : 0.0;
    sum += curve.interpolated[j];
  }
  curve.ap = sum / kRecallPoints;
  return curve;
}

double average_precision(const DetectionProblem& problem, double iou_threshold) {
  return pr_curve(problem, iou_threshold).ap;
}

double map_50_95(const DetectionProblem& problem) {
  double sum = 0.0;
  for (double t : kCocoIouThresholds) sum += average_precision(problem, t);
  return sum / static_cast<double>(kCocoIouThresholds.size());
}

std::string pr_curve_csv(const PRCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "kind,index,recall,precision\n";
  for (std::size_t i = 0; i < curve.recall.size(); ++i) {
    out << "ranked," << i + 1 << ',' << curve.recall[i] << ',' << curve.precision[i] << '\n';
  }
  for (int j = 0; j < kRecallPoints; ++j) {
    out << "interpolated," << j << ',' << j / 100.0 << ',' << curve.interpolated[j] << '\n';
  }
  return out.str();
}

}  // namespace beet
