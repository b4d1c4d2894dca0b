#include "beet/synthesis.hpp"

#include <algorithm>
#include <map>

#include "beet/annotations.hpp"
#include "beet/error.hpp"
#include "beet/geometry.hpp"
#include "beet/parallel.hpp"
#include "beet/raster.hpp"

namespace beet {
namespace {

struct Merge {
  BinaryMask mask;  // union of contributing regions, holes filled
  std::vector<std::size_t> contributing;
  std::vector<std::size_t> dropped;
  bool has_holes = false;
};

// Strict weak order used to pick the seed independently of input order.
bool seed_before(const AnnotatedRegion& a, const AnnotatedRegion& b) {
  const double area_a = polygon_area(a.polygon);
  const double area_b = polygon_area(b.polygon);
  if (area_a != area_b) return area_a > area_b;
  const auto& va = a.polygon.vertices();
  const auto& vb = b.polygon.vertices();
  return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end(),
                                      [](const Point& p, const Point& q) {
                                        return p.x != q.x ? p.x < q.x : p.y < q.y;
                                      });
}

bool overlaps(const BinaryMask& a, const BinaryMask& b) {
  const auto x = a.cells();
  const auto y = b.cells();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] & y[i]) return true;
  }
  return false;
}

void or_into(BinaryMask& dst, const BinaryMask& src) {
  auto d = dst.mutable_cells();
  const auto s = src.cells();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] |= s[i];
}

// Empty `candidates` means the instance has only Leaf regions.
Merge merge_regions(const AnnotatedImage& image, const std::vector<std::size_t>& candidates) {
  Merge out;
  std::vector<std::size_t> order = candidates;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return seed_before(image.regions[a], image.regions[b]);
  });
  std::vector<BinaryMask> masks;
  masks.reserve(order.size());
  for (std::size_t idx : order) {
    masks.push_back(rasterize_polygon(image.regions[idx].polygon, image.width, image.height));
  }
  out.mask = masks.front();
  std::vector<bool> used(order.size(), false);
  used[0] = true;
  out.contributing.push_back(order[0]);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 1; k < order.size(); ++k) {
      if (used[k] || !overlaps(out.mask, masks[k])) continue;
      or_into(out.mask, masks[k]);
      used[k] = true;
      out.contributing.push_back(order[k]);
      changed = true;
    }
  }
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (!used[k]) out.dropped.push_back(order[k]);
  }
  std::sort(out.contributing.begin(), out.contributing.end());
  std::sort(out.dropped.begin(), out.dropped.end());
  BinaryMask filled = fill_holes(out.mask);
  out.has_holes = !(filled == out.mask);
  out.mask = std::move(filled);
  return out;
}

std::map<int, std::vector<std::size_t>> non_leaf_by_instance(const AnnotatedImage& image) {
  std::map<int, std::vector<std::size_t>> by_instance;
  for (std::size_t i = 0; i < image.regions.size(); ++i) {
    auto& list = by_instance[image.regions[i].instance_id];
    if (image.regions[i].cls != SemanticClass::Leaf) list.push_back(i);
  }
  return by_instance;
}

}  // namespace

SynthesisReport synthesize_instances(const AnnotatedImage& image) {
  SynthesisReport report;
  for (const auto& [instance, candidates] : non_leaf_by_instance(image)) {
    if (candidates.empty()) {
      report.skipped.push_back({image.id, instance});
      continue;
    }
    Merge merge = merge_regions(image, candidates);
    for (std::size_t idx : merge.dropped) {
      report.dropped.push_back({image.id, instance, idx, image.regions[idx].cls});
    }
    if (merge.contributing.size() == 1 && !merge.has_holes) {
      report.instances.push_back(
          {image.id, instance, image.regions[merge.contributing.front()].polygon});
      continue;
    }
    std::optional<Polygon> contour = trace_outer_contour(merge.mask);
    if (!contour) {
      // Every contributing region was too thin to cover a pixel center.
      report.instances.push_back(
          {image.id, instance, image.regions[merge.contributing.front()].polygon});
      continue;
    }
    report.instances.push_back({image.id, instance, std::move(*contour)});
  }
  return report;
}

BinaryMask merged_instance_mask(const AnnotatedImage& image, int instance_id) {
  const auto by_instance = non_leaf_by_instance(image);
  auto it = by_instance.find(instance_id);
  if (it == by_instance.end() || it->second.empty()) return BinaryMask(image.width, image.height);
  return merge_regions(image, it->second).mask;
}

std::vector<AnnotatedImage> instance_dataset(std::span<const AnnotatedImage> images,
                                             SynthesisReport* report) {
  std::vector<SynthesisReport> reports(images.size());
  parallel_for(images.size(), [&](std::size_t i) { reports[i] = synthesize_instances(images[i]); });

  std::vector<AnnotatedImage> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    AnnotatedImage img = images[i];
    img.regions.clear();
    for (InstanceAnnotation& inst : reports[i].instances) {
      img.regions.push_back({SemanticClass::Beet, std::move(inst.polygon), inst.instance_id});
    }
    out.push_back(std::move(img));
    if (report) {
      report->skipped.insert(report->skipped.end(), reports[i].skipped.begin(),
                             reports[i].skipped.end());
      report->dropped.insert(report->dropped.end(), reports[i].dropped.begin(),
                             reports[i].dropped.end());
    }
  }
  if (report) {
    for (const AnnotatedImage& img : out) {
      for (const AnnotatedRegion& r : img.regions) {
        report->instances.push_back({img.id, r.instance_id, r.polygon});
      }
    }
  }
  return out;
}

SynthesisReport write_instance_dataset(std::span<const AnnotatedImage> images,
                                       const std::filesystem::path& out_path) {
  SynthesisReport report;
  const std::vector<AnnotatedImage> converted = instance_dataset(images, &report);
  write_annotations(out_path, converted);
  return report;
}

}  // namespace beet
