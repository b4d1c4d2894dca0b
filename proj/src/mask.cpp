#include "beet/mask.hpp"

#include <string>

#include "beet/error.hpp"

namespace beet {
namespace {

void check_dims(int width, int height) {
  if (width < 0 || height < 0) throw ValidationError("raster dimensions must be non-negative");
}

}  // namespace

SemanticMask::SemanticMask(int width, int height, SemanticClass fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                static_cast<std::uint8_t>(fill));
}

SemanticMask::SemanticMask(int width, int height, std::vector<std::uint8_t> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  check_dims(width, height);
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ValidationError("semantic mask buffer length does not match " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
  for (std::uint8_t v : cells_) {
    if (v >= kNumClasses) {
      throw ValidationError("semantic mask value " + std::to_string(v) + " is not a class index");
    }
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  check_dims(width, height);
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  check_dims(width, height);
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ValidationError("binary mask buffer length does not match dimensions");
  }
  for (std::uint8_t v : cells_) {
    if (v > 1) throw ValidationError("binary mask value " + std::to_string(v) + " is not 0/1");
  }
}

std::size_t BinaryMask::count() const noexcept {
  const std::uint8_t* data = cells_.data();
  const long long n = static_cast<long long>(cells_.size());
  std::size_t total = 0;
#pragma omp parallel for reduction(+ : total) schedule(static)
  for (long long i = 0; i < n; ++i) total += data[i];
  return total;
}

BinaryMask class_mask(const SemanticMask& mask, SemanticClass c) {
  BinaryMask out(mask.width(), mask.height());
  const auto src = mask.cells();
  auto dst = out.mutable_cells();
  const auto value = static_cast<std::uint8_t>(c);
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == value ? 1 : 0;
  return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError("mask_or: dimension mismatch");
  }
  BinaryMask out(a.width(), a.height());
  auto dst = out.mutable_cells();
  const auto x = a.cells();
  const auto y = b.cells();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = x[i] | y[i];
  return out;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError("mask_iou: dimension mismatch " + std::to_string(a.width()) + "x" +
                          std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()));
  }
  const std::uint8_t* x = a.cells().data();
  const std::uint8_t* y = b.cells().data();
  const long long n = static_cast<long long>(a.pixel_count());
  std::size_t inter = 0;
  std::size_t uni = 0;
#pragma omp parallel for reduction(+ : inter, uni) schedule(static)
  for (long long i = 0; i < n; ++i) {
    inter += x[i] & y[i];
    uni += x[i] | y[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace beet
