#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "beet/mask.hpp"
#include "beet/types.hpp"

namespace beet {

// ---- dataset split -------------------------------------------------------

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

/// Grouped random split. Groups (images sharing group_id) are shuffled with a
/// seeded Mersenne twister, then each group goes to val while val stays below
/// its target by more than half the group size, else to test by the same rule,
/// else to train. Each partition ends within half a group of its target (train
/// within one group), and the result depends only on (images, ratios, seed).
/// Throws ValidationError for bad ratios, a missing group_id, or a group larger
/// than every target partition.
DatasetSplit make_split(std::span<const AnnotatedImage> images, SplitRatios ratios,
                        std::uint64_t seed);

std::string serialize_split(const DatasetSplit& split);
DatasetSplit parse_split(std::string_view json_text);

// ---- statistics ----------------------------------------------------------

struct StageStatsRow {
  std::size_t images = 0;
  std::size_t beets = 0;
  std::size_t locations = 0;
  std::size_t sessions = 0;
  double beets_per_image = 0.0;
  double beet_ratio_percent = 0.0;  // share of all beets
  friend bool operator==(const StageStatsRow&, const StageStatsRow&) = default;
};

/// One row per stage (indexed by Stage) plus totals.
struct StageStatsTable {
  std::array<StageStatsRow, 3> stages{};
  StageStatsRow total;
  friend bool operator==(const StageStatsTable&, const StageStatsTable&) = default;
};

/// Beets are counted as distinct instance ids per image.
StageStatsTable dataset_stats(std::span<const AnnotatedImage> images);

std::string stats_to_json(const StageStatsTable& table);
StageStatsTable stats_from_json(std::string_view json_text);
std::string stats_to_csv(const StageStatsTable& table);
/// Fixed-width table for terminals.
std::string stats_to_text(const StageStatsTable& table);

using ClassCounts = std::array<std::uint64_t, kNumClasses>;

struct ImageLabelCounts {
  std::string image_id;
  Stage stage = Stage::Sample;
  ClassCounts counts{};
};

struct LabelDistribution {
  std::array<ClassCounts, 3> per_stage{};  // indexed by Stage
  std::vector<ImageLabelCounts> per_image;  // input order
};

/// Supplies the mask of an image, or nullopt when none exists. Called
/// concurrently from worker threads.
using MaskSource = std::function<std::optional<SemanticMask>(const AnnotatedImage&)>;

/// Mask source that rasterizes the annotations themselves.
MaskSource rasterized_annotations();

/// Throws ValidationError naming the image when a mask is missing or has the
/// wrong size.
LabelDistribution label_pixel_distribution(std::span<const AnnotatedImage> images,
                                           const MaskSource& masks);

/// Long-format CSV: stage,class,pixels and, per image, fractions per class.
std::string label_distribution_stage_csv(const LabelDistribution& dist);
std::string label_distribution_image_csv(const LabelDistribution& dist);

}  // namespace beet
