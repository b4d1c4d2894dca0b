#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "beet/geometry.hpp"
#include "beet/mask.hpp"

namespace beet {

enum class PatchTier : std::uint8_t { Small = 0, Medium, Large };

struct PatchSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const PatchSize&, const PatchSize&) = default;
};

/// Small 512x288, Medium 768x448, Large 1056x576.
PatchSize patch_size(PatchTier tier);
PatchTier parse_tier(std::string_view name);
std::string_view to_string(PatchTier tier);

inline constexpr double kDefaultMarginFrac = 0.05;
inline constexpr std::uint8_t kLetterboxGray = 128;

/// Maps an integer crop rectangle of the image into a fixed-size patch by a
/// uniform scale plus letterbox offsets:
///   u = (x - crop_x0) * scale + pad_x,   v = (y - crop_y0) * scale + pad_y
/// in continuous pixel coordinates (pixel centers at +0.5).
struct PatchTransform {
  int crop_x0 = 0;
  int crop_y0 = 0;
  int crop_x1 = 0;  // exclusive
  int crop_y1 = 0;
  PatchSize target;
  double scale = 1.0;
  int pad_x = 0;
  int pad_y = 0;

  int crop_width() const noexcept { return crop_x1 - crop_x0; }
  int crop_height() const noexcept { return crop_y1 - crop_y0; }
  double content_width() const noexcept { return crop_width() * scale; }
  double content_height() const noexcept { return crop_height() * scale; }

  Point to_patch(Point image_pt) const noexcept {
    return {(image_pt.x - crop_x0) * scale + pad_x, (image_pt.y - crop_y0) * scale + pad_y};
  }
  Point to_image(Point patch_pt) const noexcept {
    return {(patch_pt.x - pad_x) / scale + crop_x0, (patch_pt.y - pad_y) / scale + crop_y0};
  }

  /// Image pixel sampled by patch pixel (u, v), or false in the letterbox band.
  bool source_pixel(int u, int v, int& x, int& y) const noexcept;
  /// Patch pixel sampled for image pixel (x, y), or false outside the crop.
  bool patch_pixel(int x, int y, int& u, int& v) const noexcept;

  friend bool operator==(const PatchTransform&, const PatchTransform&) = default;
};

/// Builds the transform for `box` grown by margin_frac of its size on each
/// side, clamped to the image and snapped outward to whole pixels. Throws
/// ValidationError if the target is not a configured tier size, margin_frac
/// is negative, or the clamped crop is empty.
PatchTransform make_patch_transform(const AxisAlignedBox& box, int image_width, int image_height,
                                    PatchSize target, double margin_frac);

struct Patch {
  RgbImage raster;
  PatchTransform transform;
};

/// Crop, aspect-preserving nearest-neighbor resize and gray letterboxing.
Patch extract_patch(const RgbImage& image, const AxisAlignedBox& box, PatchSize target,
                    double margin_frac);

/// Nearest-neighbor resampling of a full-image mask into patch space; the
/// letterbox band is Bg.
SemanticMask warp_to_patch(const SemanticMask& full, const PatchTransform& transform);

struct FuseInput {
  const SemanticMask* patch_mask = nullptr;
  PatchTransform transform;
  const BinaryMask* instance_mask = nullptr;
  double confidence = 0.0;
};

struct FuseResult {
  SemanticMask mask;
  /// Instance pixels that fell outside their patch and were left untouched.
  std::size_t dropped_pixels = 0;
};

/// Starts from an all-Bg canvas and pastes instances in ascending confidence
/// (ties in input order); each writes only inside its own instance mask, so
/// higher-confidence instances win on overlap. Throws ValidationError when a
/// patch mask does not match its transform's target or an instance mask does
/// not match the canvas.
FuseResult fuse(std::span<const FuseInput> inputs, int canvas_width, int canvas_height);

}  // namespace beet
