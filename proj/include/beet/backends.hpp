#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "beet/geometry.hpp"
#include "beet/mask.hpp"
#include "beet/patch.hpp"
#include "beet/types.hpp"

namespace beet {

/// What a backend gets to see of an image. `raster` may be null when the
/// backend does not need pixels (the oracle never does).
struct ImageRef {
  std::string id;
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  const RgbImage* raster = nullptr;
};

struct InstanceDetection {
  BinaryMask mask;  // image-sized
  AxisAlignedBox box;
  double score = 0.0;
};

struct PatchRequest {
  const ImageRef* image = nullptr;
  const RgbImage* patch = nullptr;  // transform.target sized
  PatchTransform transform;
};

struct MarkerDetection {
  OrientedBox box;
  MarkerClass cls = MarkerClass::Ruler;
  double score = 0.0;
};

/// Stage 1: whole-beet instance masks.
class InstanceSegmenter {
 public:
  virtual ~InstanceSegmenter() = default;
  virtual std::vector<InstanceDetection> detect_instances(const ImageRef& image) = 0;
};

/// Stage 2: fine-grained classes for one letterboxed patch.
class PatchSegmenter {
 public:
  virtual ~PatchSegmenter() = default;
  virtual SemanticMask segment(const PatchRequest& request) = 0;
};

/// Stage 1 (markers): oriented boxes of reference objects.
class MarkerDetector {
 public:
  virtual ~MarkerDetector() = default;
  virtual std::vector<MarkerDetection> detect_markers(const ImageRef& image) = 0;
};

/// Non-owning bundle handed to the pipeline.
struct Backends {
  InstanceSegmenter* instances = nullptr;
  PatchSegmenter* patches = nullptr;
  MarkerDetector* markers = nullptr;
};

// Interface invariant checks; each throws ValidationError describing the
// first violation.
void validate_instances(const std::vector<InstanceDetection>& dets, const ImageRef& image);
void validate_patch_mask(const SemanticMask& mask, PatchSize expected);
void validate_markers(const std::vector<MarkerDetection>& dets);

/// Answers every query from ground-truth annotations: synthesized instance
/// masks (score 1), the rasterized ground truth warped into each patch, and
/// obb_from_corners of each marker (score 1). Deterministic; safe to share
/// between threads.
class OracleBackend final : public InstanceSegmenter,
                            public PatchSegmenter,
                            public MarkerDetector {
 public:
  explicit OracleBackend(std::vector<AnnotatedImage> images);

  std::vector<InstanceDetection> detect_instances(const ImageRef& image) override;
  SemanticMask segment(const PatchRequest& request) override;
  std::vector<MarkerDetection> detect_markers(const ImageRef& image) override;

  Backends backends() { return {this, this, this}; }

  /// Throws BackendError for an unknown image id.
  const AnnotatedImage& image(const std::string& id) const;
  /// Lookup by the image's path field, for adapters that only see paths.
  const AnnotatedImage* find_by_path(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<const SemanticMask> ground_truth(const AnnotatedImage& img);

  std::vector<AnnotatedImage> images_;
  std::map<std::string, std::size_t> by_id_;
  std::mutex cache_mutex_;
  std::map<std::string, std::shared_ptr<const SemanticMask>> gt_cache_;
};

}  // namespace beet
