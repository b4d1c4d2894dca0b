#include "beet/backends.hpp"

#include <cmath>
#include <string>

#include "beet/error.hpp"
#include "beet/raster.hpp"
#include "beet/synthesis.hpp"

namespace beet {

void validate_instances(const std::vector<InstanceDetection>& dets, const ImageRef& image) {
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const InstanceDetection& d = dets[i];
    const std::string where = "instance " + std::to_string(i);
    if (d.mask.width() != image.width || d.mask.height() != image.height) {
      throw ValidationError(where + ": mask is " + std::to_string(d.mask.width()) + "x" +
                            std::to_string(d.mask.height()) + ", image is " +
                            std::to_string(image.width) + "x" + std::to_string(image.height));
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw ValidationError(where + ": score " + std::to_string(d.score) + " outside [0, 1]");
    }
    const AxisAlignedBox& b = d.box;
    if (!d.box.valid() || b.x_min < 0.0 || b.y_min < 0.0 || b.x_max > image.width ||
        b.y_max > image.height) {
      throw ValidationError(where + ": box is empty or outside the image");
    }
  }
}

void validate_patch_mask(const SemanticMask& mask, PatchSize expected) {
  if (mask.width() != expected.width || mask.height() != expected.height) {
    throw ValidationError("patch mask is " + std::to_string(mask.width()) + "x" +
                          std::to_string(mask.height()) + ", expected " +
                          std::to_string(expected.width) + "x" + std::to_string(expected.height));
  }
}

void validate_markers(const std::vector<MarkerDetection>& dets) {
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!(dets[i].score >= 0.0 && dets[i].score <= 1.0)) {
      throw ValidationError("marker " + std::to_string(i) + ": score outside [0, 1]");
    }
  }
}

OracleBackend::OracleBackend(std::vector<AnnotatedImage> images) : images_(std::move(images)) {
  for (std::size_t i = 0; i < images_.size(); ++i) by_id_[images_[i].id] = i;
}

const AnnotatedImage& OracleBackend::image(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw BackendError("oracle", "unknown image id '" + id + "'");
  return images_[it->second];
}

const AnnotatedImage* OracleBackend::find_by_path(const std::filesystem::path& path) const {
  for (const AnnotatedImage& img : images_) {
    if (std::filesystem::path(img.path) == path) return &img;
  }
  const auto name = path.filename();
  for (const AnnotatedImage& img : images_) {
    if (std::filesystem::path(img.path).filename() == name) return &img;
  }
  return nullptr;
}

std::shared_ptr<const SemanticMask> OracleBackend::ground_truth(const AnnotatedImage& img) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = gt_cache_.find(img.id);
    if (it != gt_cache_.end()) return it->second;
  }
  auto mask = std::make_shared<const SemanticMask>(rasterize(img.regions, img.width, img.height));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return gt_cache_.emplace(img.id, std::move(mask)).first->second;
}

std::vector<InstanceDetection> OracleBackend::detect_instances(const ImageRef& ref) {
  const AnnotatedImage& img = image(ref.id);
  std::vector<InstanceDetection> out;
  for (const InstanceAnnotation& inst : synthesize_instances(img).instances) {
    BinaryMask mask = rasterize_polygon(inst.polygon, img.width, img.height);
    const auto box = mask_bounds(mask);
    if (!box) continue;  // covers no pixel center
    out.push_back({std::move(mask), *box, 1.0});
  }
  return out;
}

SemanticMask OracleBackend::segment(const PatchRequest& request) {
  if (!request.image) throw BackendError("oracle", "patch request without an image");
  const AnnotatedImage& img = image(request.image->id);
  return warp_to_patch(*ground_truth(img), request.transform);
}

std::vector<MarkerDetection> OracleBackend::detect_markers(const ImageRef& ref) {
  const AnnotatedImage& img = image(ref.id);
  std::vector<MarkerDetection> out;
  out.reserve(img.markers.size());
  for (const MarkerAnnotation& m : img.markers) {
    out.push_back({obb_from_corners(m.corners()), m.marker_class(), 1.0});
  }
  return out;
}

}  // namespace beet
