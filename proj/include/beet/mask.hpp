#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "beet/types.hpp"

namespace beet {

/// Dense row-major raster of class indices 0..6.
class SemanticMask {
 public:
  SemanticMask() = default;
  SemanticMask(int width, int height, SemanticClass fill = SemanticClass::Bg);
  /// Adopts `cells`; throws ValidationError on a size mismatch or a value >= 7.
  SemanticMask(int width, int height, std::vector<std::uint8_t> cells);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return cells_.size(); }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  SemanticClass at(int x, int y) const noexcept {
    return class_from_index(cells_[index(x, y)]);
  }
  void set(int x, int y, SemanticClass c) noexcept {
    cells_[index(x, y)] = static_cast<std::uint8_t>(c);
  }

  std::span<const std::uint8_t> cells() const noexcept { return cells_; }
  std::span<std::uint8_t> mutable_cells() noexcept { return cells_; }

  friend bool operator==(const SemanticMask&, const SemanticMask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Row-major raster of {0, 1}.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> cells);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return cells_.size(); }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  bool at(int x, int y) const noexcept { return cells_[index(x, y)] != 0; }
  void set(int x, int y, bool v) noexcept { cells_[index(x, y)] = v ? 1 : 0; }

  std::span<const std::uint8_t> cells() const noexcept { return cells_; }
  std::span<std::uint8_t> mutable_cells() noexcept { return cells_; }

  std::size_t count() const noexcept;
  bool empty_set() const noexcept { return count() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t gray = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, gray) {}

  std::uint8_t* px(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* px(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

/// Per-class binary view of a semantic mask.
BinaryMask class_mask(const SemanticMask& mask, SemanticClass c);

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);

/// |a ∩ b| / |a ∪ b|; 1.0 when both are empty. Throws ValidationError on a
/// dimension mismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

}  // namespace beet
