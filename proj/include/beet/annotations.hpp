#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "beet/types.hpp"

namespace beet {

inline constexpr int kAnnotationSchemaVersion = 1;

struct LoadResult {
  std::vector<AnnotatedImage> images;
  /// Polygons dropped for having < 3 distinct vertices or zero area.
  std::size_t dropped_polygons = 0;
  std::vector<std::string> warnings;
};

/// Parses the annotation JSON document. Throws ParseError (with byte offset)
/// for malformed JSON and ValidationError for schema or domain violations.
/// Out-of-bounds coordinates are clamped to [0, width] x [0, height].
LoadResult parse_annotations(std::string_view json_text);
LoadResult load_annotations(const std::filesystem::path& path);

std::string serialize_annotations(const std::vector<AnnotatedImage>& images);
void write_annotations(const std::filesystem::path& path,
                       const std::vector<AnnotatedImage>& images);

/// Reads a whole file; throws IoError.
std::string read_text_file(const std::filesystem::path& path);
/// Truncates and writes; throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace beet
