#include "beet/patch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "beet/error.hpp"

namespace beet {

PatchSize patch_size(PatchTier tier) {
  switch (tier) {
    case PatchTier::Small: return {512, 288};
    case PatchTier::Medium: return {768, 448};
    case PatchTier::Large: return {1056, 576};
  }
  return {0, 0};
}

PatchTier parse_tier(std::string_view name) {
  if (name == "small") return PatchTier::Small;
  if (name == "medium") return PatchTier::Medium;
  if (name == "large") return PatchTier::Large;
  throw ValidationError("unknown patch tier '" + std::string(name) +
                        "' (expected small, medium or large)");
}

std::string_view to_string(PatchTier tier) {
  switch (tier) {
    case PatchTier::Small: return "small";
    case PatchTier::Medium: return "medium";
    case PatchTier::Large: return "large";
  }
  return "?";
}

bool PatchTransform::source_pixel(int u, int v, int& x, int& y) const noexcept {
  const double sx = (u + 0.5 - pad_x) / scale + crop_x0;
  const double sy = (v + 0.5 - pad_y) / scale + crop_y0;
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  if (fx < crop_x0 || fx >= crop_x1 || fy < crop_y0 || fy >= crop_y1) return false;
  x = static_cast<int>(fx);
  y = static_cast<int>(fy);
  return true;
}

bool PatchTransform::patch_pixel(int x, int y, int& u, int& v) const noexcept {
  if (x < crop_x0 || x >= crop_x1 || y < crop_y0 || y >= crop_y1) return false;
  const double pu = std::floor((x + 0.5 - crop_x0) * scale + pad_x);
  const double pv = std::floor((y + 0.5 - crop_y0) * scale + pad_y);
  if (pu < 0 || pv < 0 || pu >= target.width || pv >= target.height) return false;
  u = static_cast<int>(pu);
  v = static_cast<int>(pv);
  return true;
}

PatchTransform make_patch_transform(const AxisAlignedBox& box, int image_width, int image_height,
                                    PatchSize target, double margin_frac) {
  const bool known = target == patch_size(PatchTier::Small) ||
                     target == patch_size(PatchTier::Medium) ||
                     target == patch_size(PatchTier::Large);
  if (!known) {
    throw ValidationError("patch size " + std::to_string(target.width) + "x" +
                          std::to_string(target.height) + " is not a configured tier");
  }
  if (!(margin_frac >= 0.0)) throw ValidationError("margin_frac must be non-negative");

  const double mx = margin_frac * box.width();
  const double my = margin_frac * box.height();
  const double x0 = std::clamp(box.x_min - mx, 0.0, static_cast<double>(image_width));
  const double x1 = std::clamp(box.x_max + mx, 0.0, static_cast<double>(image_width));
  const double y0 = std::clamp(box.y_min - my, 0.0, static_cast<double>(image_height));
  const double y1 = std::clamp(box.y_max + my, 0.0, static_cast<double>(image_height));

  PatchTransform t;
  t.crop_x0 = static_cast<int>(std::floor(x0));
  t.crop_y0 = static_cast<int>(std::floor(y0));
  t.crop_x1 = static_cast<int>(std::ceil(x1));
  t.crop_y1 = static_cast<int>(std::ceil(y1));
  if (t.crop_width() <= 0 || t.crop_height() <= 0) {
    throw ValidationError("instance box is empty after clamping to the image");
  }
  t.target = target;
  t.scale = std::min(static_cast<double>(target.width) / t.crop_width(),
                     static_cast<double>(target.height) / t.crop_height());
  t.pad_x = std::max(0, static_cast<int>(std::floor((target.width - t.content_width()) / 2.0)));
  t.pad_y = std::max(0, static_cast<int>(std::floor((target.height - t.content_height()) / 2.0)));
  return t;
}

Patch extract_patch(const RgbImage& image, const AxisAlignedBox& box, PatchSize target,
                    double margin_frac) {
  Patch patch;
  patch.transform = make_patch_transform(box, image.width, image.height, target, margin_frac);
  patch.raster = RgbImage(target.width, target.height, kLetterboxGray);
  const PatchTransform& t = patch.transform;
#pragma omp parallel for schedule(static)
  for (int v = 0; v < target.height; ++v) {
    for (int u = 0; u < target.width; ++u) {
      int x = 0;
      int y = 0;
      if (!t.source_pixel(u, v, x, y)) continue;
      const std::uint8_t* src = image.px(x, y);
      std::uint8_t* dst = patch.raster.px(u, v);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return patch;
}

SemanticMask warp_to_patch(const SemanticMask& full, const PatchTransform& t) {
  SemanticMask out(t.target.width, t.target.height);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < t.target.height; ++v) {
    for (int u = 0; u < t.target.width; ++u) {
      int x = 0;
      int y = 0;
      if (t.source_pixel(u, v, x, y) && full.contains(x, y)) out.set(u, v, full.at(x, y));
    }
  }
  return out;
}

FuseResult fuse(std::span<const FuseInput> inputs, int canvas_width, int canvas_height) {
  FuseResult result{SemanticMask(canvas_width, canvas_height), 0};
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inputs[a].confidence < inputs[b].confidence;
  });
  for (const FuseInput& in : inputs) {
    if (!in.patch_mask || !in.instance_mask) throw ValidationError("fuse: missing mask");
    if (in.patch_mask->width() != in.transform.target.width ||
        in.patch_mask->height() != in.transform.target.height) {
      throw ValidationError("fuse: patch mask does not match its transform");
    }
    if (in.instance_mask->width() != canvas_width ||
        in.instance_mask->height() != canvas_height) {
      throw ValidationError("fuse: instance mask does not match the canvas");
    }
  }

  SemanticMask& canvas = result.mask;
  std::size_t dropped = 0;
  for (std::size_t idx : order) {
    const FuseInput& in = inputs[idx];
#pragma omp parallel for schedule(static) reduction(+ : dropped)
    for (int y = 0; y < canvas_height; ++y) {
      for (int x = 0; x < canvas_width; ++x) {
        if (!in.instance_mask->at(x, y)) continue;
        int u = 0;
        int v = 0;
        if (!in.transform.patch_pixel(x, y, u, v)) {
          ++dropped;
          continue;
        }
        canvas.set(x, y, in.patch_mask->at(u, v));
      }
    }
  }
  result.dropped_pixels = dropped;
  return result;
}

}  // namespace beet
