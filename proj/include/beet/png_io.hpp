#pragma once

#include <filesystem>

#include "beet/mask.hpp"

namespace beet {

// Masks are stored as 8-bit indexed-color PNGs whose palette index is the
// class index (binary masks use indices 0/1). Readers also accept 8-bit
// grayscale, interpreting gray levels as indices. All functions throw IoError.

void write_semantic_png(const std::filesystem::path& path, const SemanticMask& mask);
SemanticMask read_semantic_png(const std::filesystem::path& path);

void write_binary_png(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_binary_png(const std::filesystem::path& path);

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);
/// Any PNG color type is converted to 8-bit RGB (alpha dropped).
RgbImage read_rgb_png(const std::filesystem::path& path);

}  // namespace beet
