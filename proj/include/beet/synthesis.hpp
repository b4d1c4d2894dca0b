#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "beet/mask.hpp"
#include "beet/types.hpp"

namespace beet {

/// Whole-beet silhouette for the one-class instance task. The class is
/// always Beet.
struct InstanceAnnotation {
  std::string image_id;
  int instance_id = 0;
  Polygon polygon;
};

struct SkippedInstance {
  std::string image_id;
  int instance_id = 0;
};

/// A region that never overlapped its instance's merged shape.
struct DroppedRegion {
  std::string image_id;
  int instance_id = 0;
  std::size_t region_index = 0;  // index into AnnotatedImage::regions
  SemanticClass cls = SemanticClass::Beet;
};

struct SynthesisReport {
  std::vector<InstanceAnnotation> instances;  // ascending instance_id
  std::vector<SkippedInstance> skipped;       // instances with only Leaf regions
  std::vector<DroppedRegion> dropped;
};

// Per instance: Leaf regions are discarded; the largest remaining region by
// polygon area seeds the shape (ties broken by vertex order, so input order
// never matters); every region sharing at least one covered pixel with the
// shape is merged until nothing changes; interior holes are filled. Overlap
// and union are evaluated on the pixel-center raster at native resolution,
// so regions that only touch along an edge do not merge. A single region
// whose raster has no holes is returned unchanged; anything else is traced
// back to a polygon along pixel edges.
SynthesisReport synthesize_instances(const AnnotatedImage& image);

/// Pixel coverage of the merged shape, before contour tracing. Exposed for
/// tests; equals rasterize_polygon(instance.polygon).
BinaryMask merged_instance_mask(const AnnotatedImage& image, int instance_id);

/// Converts every image to one Beet region per synthesized instance (Leaf
/// absent, markers and metadata kept). Images are processed in parallel;
/// output and report entries follow input order.
std::vector<AnnotatedImage> instance_dataset(std::span<const AnnotatedImage> images,
                                             SynthesisReport* report = nullptr);

/// instance_dataset() written in the annotation JSON schema.
SynthesisReport write_instance_dataset(std::span<const AnnotatedImage> images,
                                       const std::filesystem::path& out_path);

}  // namespace beet
