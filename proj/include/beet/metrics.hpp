#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beet/mask.hpp"
#include "beet/types.hpp"

namespace beet {

/// Per-class pixel tallies. Each evaluated pixel contributes one TP or one FN
/// to its ground-truth class, so sum(tp) + sum(fn) == pixels.
struct ConfusionTotals {
  std::array<std::uint64_t, kNumClasses> tp{};
  std::array<std::uint64_t, kNumClasses> fp{};
  std::array<std::uint64_t, kNumClasses> fn{};
  std::uint64_t pixels = 0;

  ConfusionTotals& operator+=(const ConfusionTotals& other);
  friend bool operator==(const ConfusionTotals&, const ConfusionTotals&) = default;
};

/// Tallies over `roi` (or every pixel when null). Pixels outside the roi are
/// ignored. Throws ValidationError on a dimension mismatch.
ConfusionTotals confusion(const SemanticMask& pred, const SemanticMask& gt,
                          const BinaryMask* roi = nullptr);

struct MiouResult {
  /// IoU per class; nullopt when the class is absent from both prediction
  /// and ground truth in the evaluated scope (excluded from the mean).
  std::array<std::optional<double>, kNumClasses> per_class{};
  double mean = 0.0;
};

enum class MiouMode {
  Aggregate,  // sum tallies over all samples, then one IoU per class
  PerSample,  // mIoU per sample, then the arithmetic mean over samples
};

/// Throws ValidationError("no evaluable classes") when every class is excluded.
MiouResult miou(const ConfusionTotals& totals);

/// Aggregate mode reduces the tallies first. PerSample mode reports the mean
/// of per-sample mIoUs, with per_class[c] the mean IoU over samples where c
/// was evaluable.
MiouResult miou(std::span<const ConfusionTotals> samples, MiouMode mode);

/// Per-pixel class probabilities stored class-major: value(c, i) is at
/// data[c * width * height + i].
struct ProbabilityRaster {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ProbabilityRaster() = default;
  ProbabilityRaster(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * kNumClasses, 0.0) {}

  std::size_t plane() const noexcept { return static_cast<std::size_t>(width) * height; }
  double& at(int cls, std::size_t pixel) { return data[cls * plane() + pixel]; }
  double at(int cls, std::size_t pixel) const { return data[cls * plane() + pixel]; }

  /// Probability 1 on the mask's class at every pixel.
  static ProbabilityRaster one_hot(const SemanticMask& mask);
};

inline constexpr double kDefaultDiceEpsilon = 1e-6;

/// Smoothed Dice loss 1 - (2 sum p g + eps) / (sum p + sum g + eps) computed
/// per class over all pixels with one-hot g, averaged over classes present in
/// gt. Throws ValidationError for shape mismatch, eps <= 0, probabilities
/// outside [0, 1] or pixels whose probabilities do not sum to 1 within 1e-6.
double dice_loss(const ProbabilityRaster& pred, const SemanticMask& gt,
                 double epsilon = kDefaultDiceEpsilon);

// ---- meta-parameter breakdown -------------------------------------------

struct SampleScore {
  std::string image_id;
  double miou = 0.0;
  MetaParams meta;
};

struct BreakdownCell {
  std::size_t count = 0;
  double mean = 0.0;  // 0 when count == 0
  friend bool operator==(const BreakdownCell&, const BreakdownCell&) = default;
};

struct MetaBreakdown {
  std::array<BreakdownCell, 3> lighting{};  // indexed by Lighting
  std::array<BreakdownCell, 2> moisture{};  // indexed by Moisture
  std::array<BreakdownCell, 3> stage{};     // indexed by Stage
  BreakdownCell overall;
  friend bool operator==(const MetaBreakdown&, const MetaBreakdown&) = default;
};

MetaBreakdown meta_breakdown(std::span<const SampleScore> samples);

/// category,value,count,mean_miou rows; empty cells have an empty mean.
std::string meta_breakdown_csv(const MetaBreakdown& b);

/// Header Bg..Rot,Mean; excluded classes are written as empty cells.
std::string iou_table_csv(const MiouResult& r);
std::string iou_table_text(const MiouResult& r);

}  // namespace beet
