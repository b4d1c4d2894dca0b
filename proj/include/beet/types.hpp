#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace beet {

// Class indices are part of every file format (mask PNGs, JSON tables).
enum class SemanticClass : std::uint8_t { Bg = 0, Beet, Cut, Leaf, Soil, Dmg, Rot };
inline constexpr int kNumClasses = 7;

enum class MarkerClass : std::uint8_t { Ruler = 0, Sign };
inline constexpr int kNumMarkerClasses = 2;

enum class Stage : std::uint8_t { Sample = 0, Harvest, Storage };
enum class Lighting : std::uint8_t { Sunny = 0, Diffuse, Artificial };
enum class Moisture : std::uint8_t { Dry = 0, Wet };

inline constexpr std::array<SemanticClass, kNumClasses> kAllClasses = {
    SemanticClass::Bg,   SemanticClass::Beet, SemanticClass::Cut, SemanticClass::Leaf,
    SemanticClass::Soil, SemanticClass::Dmg,  SemanticClass::Rot};
inline constexpr std::array<Stage, 3> kAllStages = {Stage::Sample, Stage::Harvest, Stage::Storage};
inline constexpr std::array<Lighting, 3> kAllLightings = {Lighting::Sunny, Lighting::Diffuse,
                                                          Lighting::Artificial};
inline constexpr std::array<Moisture, 2> kAllMoistures = {Moisture::Dry, Moisture::Wet};

constexpr int index_of(SemanticClass c) { return static_cast<int>(c); }
constexpr SemanticClass class_from_index(int i) { return static_cast<SemanticClass>(i); }

std::string_view to_string(SemanticClass c);
std::string_view to_string(MarkerClass c);
std::string_view to_string(Stage s);
std::string_view to_string(Lighting l);
std::string_view to_string(Moisture m);

// Parsers throw ValidationError naming the offending label.
SemanticClass parse_semantic_class(std::string_view s);
MarkerClass parse_marker_class(std::string_view s);
Stage parse_stage(std::string_view s);
Lighting parse_lighting(std::string_view s);
Moisture parse_moisture(std::string_view s);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Twice the signed shoelace area; positive for counter-clockwise in a y-up frame.
double signed_area2(std::span<const Point> ring);

/// Closed contour in pixel coordinates. Always has >= 3 vertices, no two
/// consecutive vertices equal (including last/first) and nonzero signed area.
class Polygon {
 public:
  /// Throws ValidationError if the invariants do not hold.
  explicit Polygon(std::vector<Point> vertices);

  /// Drops consecutive duplicates (and a closing duplicate of the first
  /// vertex) before validating; returns nullopt for degenerate input.
  static std::optional<Polygon> sanitize(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  std::vector<Point> vertices_;
};

/// Four corners of a reference marker, convex and non-degenerate.
class MarkerAnnotation {
 public:
  MarkerAnnotation(MarkerClass cls, std::array<Point, 4> corners);

  MarkerClass marker_class() const noexcept { return class_; }
  const std::array<Point, 4>& corners() const noexcept { return corners_; }

  friend bool operator==(const MarkerAnnotation&, const MarkerAnnotation&) = default;

 private:
  MarkerClass class_;
  std::array<Point, 4> corners_;
};

struct AnnotatedRegion {
  SemanticClass cls = SemanticClass::Beet;  // never Bg
  Polygon polygon;
  int instance_id = 0;
  friend bool operator==(const AnnotatedRegion&, const AnnotatedRegion&) = default;
};

struct MetaParams {
  Stage stage = Stage::Sample;
  Lighting lighting = Lighting::Sunny;
  Moisture moisture = Moisture::Dry;
  std::string location;
  int session_id = 0;
  friend bool operator==(const MetaParams&, const MetaParams&) = default;
};

struct AnnotatedImage {
  std::string id;
  std::string path;
  int width = 0;
  int height = 0;
  std::string group_id;
  MetaParams meta;
  std::vector<AnnotatedRegion> regions;
  std::vector<MarkerAnnotation> markers;
  friend bool operator==(const AnnotatedImage&, const AnnotatedImage&) = default;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

}  // namespace beet
