#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "beet/backends.hpp"
#include "beet/geometry.hpp"
#include "beet/mask.hpp"
#include "beet/patch.hpp"

namespace beet {

struct MassSample {
  double area_mm2 = 0.0;
  double mass_g = 0.0;
};

struct MassModel {
  double m_bar = 0.0;  // g per mm^2
  std::size_t samples = 0;
  double mean_rel_error = 0.0;
  double max_rel_error = 0.0;
};

/// m_bar = sum(mass) / sum(area). Throws ValidationError for an empty set or
/// any non-positive (or non-finite) value.
MassModel calibrate_mass(std::span<const MassSample> samples);
inline double estimate_mass(double area_mm2, const MassModel& model) {
  return area_mm2 * model.m_bar;
}

/// CSV with columns area_mm2,mass_g; a header line is optional.
std::vector<MassSample> parse_mass_samples_csv(std::string_view text);
std::string mass_model_to_json(const MassModel& model);
MassModel mass_model_from_json(std::string_view text);

struct BeetReport {
  int id = 0;
  std::array<std::size_t, kNumClasses> areas_px{};
  std::optional<std::array<double, kNumClasses>> areas_mm2;
  std::optional<double> area_mm2;
  std::optional<double> mass_g;
  double score = 0.0;

  std::size_t pixel_count() const noexcept;
};

struct StageTimings {
  double instances_ms = 0.0;
  double patches_ms = 0.0;
  double fuse_ms = 0.0;
  double markers_ms = 0.0;
  double total_ms = 0.0;
};

struct InspectionReport {
  std::string image_id;
  std::optional<ScaleEstimate> scale;
  std::vector<BeetReport> beets;  // descending score
  SemanticMask fused;
  std::size_t dropped_pixels = 0;
  StageTimings timings;
};

struct InspectConfig {
  PatchTier tier = PatchTier::Large;
  double margin_frac = kDefaultMarginFrac;
  /// Physical size per MarkerClass; markers of an unconfigured class are ignored.
  std::array<std::optional<PhysicalSize>, 2> marker_sizes{};
  double residual_bound = 0.05;
  std::optional<MassModel> mass;
};

/// Two-stage inspection of one image. `image.raster` may be null, in which
/// case patches are cut from a uniform gray canvas. Backend failures are
/// rethrown as BackendError whose stage() is "instances", "segment" or "markers".
InspectionReport inspect_image(const ImageRef& image, const Backends& backends,
                               const InspectConfig& config);

/// Serialized form omits the fused mask.
std::string report_to_json(const InspectionReport& report);
InspectionReport report_from_json(std::string_view text);

}  // namespace beet
