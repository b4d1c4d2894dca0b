#include "beet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "beet/error.hpp"
#include "json.hpp"

namespace beet {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

template <typename Fn>
auto attributed(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw BackendError(stage, e.what());
  }
}

std::optional<ScaleEstimate> pick_scale(std::vector<MarkerDetection> dets,
                                        const InspectConfig& config) {
  std::stable_sort(dets.begin(), dets.end(), [](const MarkerDetection& a, const MarkerDetection& b) {
    return a.score > b.score;
  });
  for (const MarkerDetection& d : dets) {
    const auto& size = config.marker_sizes[static_cast<std::size_t>(d.cls)];
    if (!size) continue;
    try {
      const ScaleEstimate s = estimate_scale(MarkerAnnotation(d.cls, d.box.corners()), *size);
      if (s.residual <= config.residual_bound) return s;
    } catch (const ValidationError&) {
      // too small to measure; try the next marker
    }
  }
  return std::nullopt;
}

json areas_json(const auto& areas) {
  json j = json::object();
  for (SemanticClass c : kAllClasses) j[std::string(to_string(c))] = areas[index_of(c)];
  return j;
}

template <typename T>
std::array<T, kNumClasses> areas_from_json(const json& j) {
  std::array<T, kNumClasses> out{};
  for (SemanticClass c : kAllClasses) out[index_of(c)] = j.at(std::string(to_string(c))).get<T>();
  return out;
}

}  // namespace

MassModel calibrate_mass(std::span<const MassSample> samples) {
  if (samples.empty()) throw ValidationError("mass calibration needs at least one sample");
  double area = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!positive(samples[i].area_mm2) || !positive(samples[i].mass_g)) {
      throw ValidationError("calibration sample " + std::to_string(i) +
                            ": area and mass must be positive");
    }
    area += samples[i].area_mm2;
    mass += samples[i].mass_g;
  }
  MassModel m;
  m.m_bar = mass / area;
  m.samples = samples.size();
  double sum = 0.0;
  for (const MassSample& s : samples) {
    const double rel = std::abs(m.m_bar * s.area_mm2 - s.mass_g) / s.mass_g;
    sum += rel;
    m.max_rel_error = std::max(m.max_rel_error, rel);
  }
  m.mean_rel_error = sum / static_cast<double>(samples.size());
  return m;
}

std::vector<MassSample> parse_mass_samples_csv(std::string_view text) {
  std::vector<MassSample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected area_mm2,mass_g");
    }
    const std::string a = line.substr(0, comma);
    const std::string b = line.substr(comma + 1);
    std::size_t ea = 0;
    std::size_t eb = 0;
    MassSample s;
    try {
      s.area_mm2 = std::stod(a, &ea);
      s.mass_g = std::stod(b, &eb);
    } catch (const std::exception&) {
      if (lineno == 1 && out.empty()) continue;  // header
      throw ParseError("line " + std::to_string(lineno) + ": not a number");
    }
    if (a.find_first_not_of(" \t", ea) != std::string::npos ||
        b.find_first_not_of(" \t", eb) != std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": trailing characters");
    }
    out.push_back(s);
  }
  return out;
}

std::string mass_model_to_json(const MassModel& m) {
  return json{{"m_bar", m.m_bar},
              {"samples", m.samples},
              {"mean_rel_error", m.mean_rel_error},
              {"max_rel_error", m.max_rel_error}}
      .dump(2);
}

MassModel mass_model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("mass model: ") + e.what());
  }
  MassModel m;
  try {
    m.m_bar = j.at("m_bar").get<double>();
    m.samples = j.at("samples").get<std::size_t>();
    m.mean_rel_error = j.value("mean_rel_error", 0.0);
    m.max_rel_error = j.value("max_rel_error", 0.0);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("mass model: ") + e.what());
  }
  if (!positive(m.m_bar) || m.samples < 1) {
    throw ValidationError("mass model: m_bar must be positive and samples >= 1");
  }
  return m;
}

std::size_t BeetReport::pixel_count() const noexcept {
  return std::accumulate(areas_px.begin(), areas_px.end(), std::size_t{0});
}

InspectionReport inspect_image(const ImageRef& image, const Backends& backends,
                               const InspectConfig& config) {
  if (!backends.instances || !backends.patches || !backends.markers) {
    throw ValidationError("inspect_image: all three backends are required");
  }
  if (image.width <= 0 || image.height <= 0) {
    throw ValidationError("image '" + image.id + "' has no size");
  }
  const auto t_start = Clock::now();
  InspectionReport report;
  report.image_id = image.id;

  auto t0 = Clock::now();
  std::vector<InstanceDetection> dets = attributed("instances", [&] {
    auto d = backends.instances->detect_instances(image);
    validate_instances(d, image);
    return d;
  });
  report.timings.instances_ms = ms_since(t0);

  // Highest confidence first; ids follow this order.
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  RgbImage gray;
  const RgbImage* raster = image.raster;
  if (!raster) {
    gray = RgbImage(image.width, image.height, kLetterboxGray);
    raster = &gray;
  }
  const PatchSize target = patch_size(config.tier);

  t0 = Clock::now();
  std::vector<SemanticMask> patch_masks;
  std::vector<PatchTransform> transforms;
  patch_masks.reserve(order.size());
  transforms.reserve(order.size());
  for (std::size_t idx : order) {
    Patch patch = extract_patch(*raster, dets[idx].box, target, config.margin_frac);
    PatchRequest req{&image, &patch.raster, patch.transform};
    patch_masks.push_back(attributed("segment", [&] {
      SemanticMask m = backends.patches->segment(req);
      validate_patch_mask(m, target);
      return m;
    }));
    transforms.push_back(patch.transform);
  }
  report.timings.patches_ms = ms_since(t0);

  t0 = Clock::now();
  std::vector<FuseInput> inputs;
  inputs.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const InstanceDetection& d = dets[order[k]];
    inputs.push_back({&patch_masks[k], transforms[k], &d.mask, d.score});
  }
  FuseResult fused = fuse(inputs, image.width, image.height);
  report.fused = std::move(fused.mask);
  report.dropped_pixels = fused.dropped_pixels;

  // Per-beet areas come from the beet's own patch, so overlap resolution in
  // the fused map does not move pixels between beets.
  report.beets.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const InstanceDetection& d = dets[order[k]];
    BeetReport& b = report.beets[k];
    b.id = static_cast<int>(k);
    b.score = d.score;
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        if (!d.mask.at(x, y)) continue;
        int u = 0;
        int v = 0;
        const SemanticClass c = transforms[k].patch_pixel(x, y, u, v) ? patch_masks[k].at(u, v)
                                                                       : SemanticClass::Bg;
        ++b.areas_px[index_of(c)];
      }
    }
  }
  report.timings.fuse_ms = ms_since(t0);

  t0 = Clock::now();
  std::vector<MarkerDetection> markers = attributed("markers", [&] {
    auto m = backends.markers->detect_markers(image);
    validate_markers(m);
    return m;
  });
  report.scale = pick_scale(std::move(markers), config);
  report.timings.markers_ms = ms_since(t0);

  if (report.scale) {
    for (BeetReport& b : report.beets) {
      std::array<double, kNumClasses> mm{};
      for (int c = 0; c < kNumClasses; ++c) {
        mm[c] = mask_area_mm2(static_cast<double>(b.areas_px[c]), *report.scale);
      }
      b.areas_mm2 = mm;
      b.area_mm2 = mask_area_mm2(static_cast<double>(b.pixel_count()), *report.scale);
      if (config.mass) b.mass_g = estimate_mass(*b.area_mm2, *config.mass);
    }
  }
  report.timings.total_ms = ms_since(t_start);
  return report;
}

std::string report_to_json(const InspectionReport& r) {
  json j;
  j["image_id"] = r.image_id;
  if (r.scale) {
    j["scale"] = {{"mm_per_px", r.scale->mm_per_pixel},
                  {"marker", std::string(to_string(r.scale->source))},
                  {"residual", r.scale->residual}};
  }
  json beets = json::array();
  for (const BeetReport& b : r.beets) {
    json e;
    e["id"] = b.id;
    e["areas_px"] = areas_json(b.areas_px);
    if (b.areas_mm2) e["areas_mm2"] = areas_json(*b.areas_mm2);
    if (b.area_mm2) e["area_mm2"] = *b.area_mm2;
    if (b.mass_g) e["mass_g"] = *b.mass_g;
    e["score"] = b.score;
    beets.push_back(std::move(e));
  }
  j["beets"] = std::move(beets);
  j["dropped_pixels"] = r.dropped_pixels;
  j["timings_ms"] = {{"instances", r.timings.instances_ms},
                     {"segment", r.timings.patches_ms},
                     {"fuse", r.timings.fuse_ms},
                     {"markers", r.timings.markers_ms},
                     {"total", r.timings.total_ms}};
  return j.dump(2);
}

InspectionReport report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("inspection report: ") + e.what());
  }
  InspectionReport r;
  try {
    r.image_id = j.at("image_id").get<std::string>();
    if (j.contains("scale")) {
      const json& s = j["scale"];
      r.scale = ScaleEstimate{s.at("mm_per_px").get<double>(),
                              parse_marker_class(s.at("marker").get<std::string>()),
                              s.at("residual").get<double>()};
    }
    for (const json& e : j.at("beets")) {
      BeetReport b;
      b.id = e.at("id").get<int>();
      b.areas_px = areas_from_json<std::size_t>(e.at("areas_px"));
      if (e.contains("areas_mm2")) b.areas_mm2 = areas_from_json<double>(e["areas_mm2"]);
      if (e.contains("area_mm2")) b.area_mm2 = e["area_mm2"].get<double>();
      if (e.contains("mass_g")) b.mass_g = e["mass_g"].get<double>();
      b.score = e.at("score").get<double>();
      r.beets.push_back(std::move(b));
    }
    r.dropped_pixels = j.value("dropped_pixels", std::size_t{0});
    const json& t = j.at("timings_ms");
    r.timings = {t.at("instances").get<double>(), t.at("segment").get<double>(),
                 t.at("fuse").get<double>(), t.at("markers").get<double>(),
                 t.at("total").get<double>()};
  } catch (const json::exception& e) {
    throw ValidationError(std::string("inspection report: ") + e.what());
  }
  return r;
}

}  // namespace beet
