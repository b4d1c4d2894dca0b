#include "beet/types.hpp"

#include <cmath>

#include "beet/error.hpp"

namespace beet {
namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {"Bg",   "Beet", "Cut", "Leaf",
                                                                   "Soil", "Dmg",  "Rot"};
constexpr std::array<std::string_view, 2> kMarkerNames = {"Ruler", "Sign"};
constexpr std::array<std::string_view, 3> kStageNames = {"Sample", "Harvest", "Storage"};
constexpr std::array<std::string_view, 3> kLightingNames = {"Sunny", "Diffuse", "Artificial"};
constexpr std::array<std::string_view, 2> kMoistureNames = {"Dry", "Wet"};

template <typename Enum, std::size_t N>
Enum parse_name(const std::array<std::string_view, N>& names, std::string_view s,
                std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  throw ValidationError("unknown " + std::string(what) + " label '" + std::string(s) + "'");
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::string_view to_string(SemanticClass c) { return kClassNames.at(index_of(c)); }
std::string_view to_string(MarkerClass c) { return kMarkerNames.at(static_cast<int>(c)); }
std::string_view to_string(Stage s) { return kStageNames.at(static_cast<int>(s)); }
std::string_view to_string(Lighting l) { return kLightingNames.at(static_cast<int>(l)); }
std::string_view to_string(Moisture m) { return kMoistureNames.at(static_cast<int>(m)); }

SemanticClass parse_semantic_class(std::string_view s) {
  return parse_name<SemanticClass>(kClassNames, s, "class");
}
MarkerClass parse_marker_class(std::string_view s) {
  return parse_name<MarkerClass>(kMarkerNames, s, "marker class");
}
Stage parse_stage(std::string_view s) { return parse_name<Stage>(kStageNames, s, "stage"); }
Lighting parse_lighting(std::string_view s) {
  return parse_name<Lighting>(kLightingNames, s, "lighting");
}
Moisture parse_moisture(std::string_view s) {
  return parse_name<Moisture>(kMoistureNames, s, "moisture");
}

double signed_area2(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  double acc = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    acc += ring[j].x * ring[i].y - ring[i].x * ring[j].y;
  }
  return acc;
}

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw ValidationError("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = vertices_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("polygon vertex is not finite");
    }
    if (p == vertices_[(i + 1) % n]) {
      throw ValidationError("polygon has consecutive identical vertices");
    }
  }
  if (signed_area2(vertices_) == 0.0) throw ValidationError("polygon has zero area");
}

std::optional<Polygon> Polygon::sanitize(std::vector<Point> vertices) {
  std::vector<Point> cleaned;
  cleaned.reserve(vertices.size());
  for (const Point& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::nullopt;
    if (cleaned.empty() || !(cleaned.back() == p)) cleaned.push_back(p);
  }
  while (cleaned.size() > 1 && cleaned.front() == cleaned.back()) cleaned.pop_back();
  if (cleaned.size() < 3 || signed_area2(cleaned) == 0.0) return std::nullopt;
  return Polygon(std::move(cleaned));
}

MarkerAnnotation::MarkerAnnotation(MarkerClass cls, std::array<Point, 4> corners)
    : class_(cls), corners_(corners) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const double c = cross(corners_[i], corners_[(i + 1) % 4], corners_[(i + 2) % 4]);
    const int s = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
    if (s == 0) throw ValidationError("marker corners are degenerate (collinear)");
    if (sign != 0 && s != sign) throw ValidationError("marker corners are not convex");
    sign = s;
  }
}

}  // namespace beet
