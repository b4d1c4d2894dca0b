#include "beet/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "beet/error.hpp"
#include "json.hpp"

namespace beet {
namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

// Identifiers may be written as strings or integers.
std::string id_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ValidationError(where + ": field '" + key + "' must be a string or integer");
}

long long int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) {
    throw ValidationError(where + ": field '" + key + "' must be an integer");
  }
  return v.get<long long>();
}

Point parse_point(const json& v, const std::string& where, int width, int height) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError(where + ": point must be [x, y]");
  }
  const double x = v[0].get<double>();
  const double y = v[1].get<double>();
  return {std::clamp(x, 0.0, static_cast<double>(width)),
          std::clamp(y, 0.0, static_cast<double>(height))};
}

MetaParams parse_meta(const json& m, const std::string& where) {
  if (!m.is_object()) throw ValidationError(where + ": 'meta' must be an object");
  MetaParams meta;
  try {
    meta.stage = parse_stage(string_field(m, "stage", where));
    meta.lighting = parse_lighting(string_field(m, "lighting", where));
    meta.moisture = parse_moisture(string_field(m, "moisture", where));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  meta.location = id_field(m, "location", where);
  meta.session_id = static_cast<int>(int_field(m, "session", where));
  return meta;
}

AnnotatedImage parse_image(const json& j, std::size_t index, LoadResult& result) {
  std::string where = "images[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ValidationError(where + ": must be an object");
  AnnotatedImage img;
  img.id = id_field(j, "id", where);
  where += " (id " + img.id + ")";
  img.path = string_field(j, "path", where);
  img.width = static_cast<int>(int_field(j, "width", where));
  img.height = static_cast<int>(int_field(j, "height", where));
  if (img.width <= 0 || img.height <= 0) {
    throw ValidationError(where + ": width and height must be positive");
  }
  img.group_id = id_field(j, "group_id", where);
  img.meta = parse_meta(field(j, "meta", where), where);

  const json& regions = field(j, "regions", where);
  if (!regions.is_array()) throw ValidationError(where + ": 'regions' must be an array");
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const json& rj = regions[r];
    const std::string rwhere = where + ".regions[" + std::to_string(r) + "]";
    if (!rj.is_object()) throw ValidationError(rwhere + ": must be an object");
    const std::string label = string_field(rj, "class", rwhere);
    SemanticClass cls;
    try {
      cls = parse_semantic_class(label);
    } catch (const ValidationError& e) {
      throw ValidationError(rwhere + ": " + e.what());
    }
    if (cls == SemanticClass::Bg) {
      throw ValidationError(rwhere + ": class 'Bg' is implicit and cannot be annotated");
    }
    const int instance = static_cast<int>(int_field(rj, "instance", rwhere));
    const json& poly = field(rj, "polygon", rwhere);
    if (!poly.is_array()) throw ValidationError(rwhere + ": 'polygon' must be an array");
    std::vector<Point> pts;
    pts.reserve(poly.size());
    for (const json& p : poly) pts.push_back(parse_point(p, rwhere, img.width, img.height));
    auto polygon = Polygon::sanitize(std::move(pts));
    if (!polygon) {
      ++result.dropped_polygons;
      result.warnings.push_back(rwhere + ": degenerate polygon dropped");
      continue;
    }
    img.regions.push_back(AnnotatedRegion{cls, std::move(*polygon), instance});
  }

  if (auto it = j.find("markers"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(where + ": 'markers' must be an array");
    for (std::size_t m = 0; m < it->size(); ++m) {
      const json& mj = (*it)[m];
      const std::string mwhere = where + ".markers[" + std::to_string(m) + "]";
      if (!mj.is_object()) throw ValidationError(mwhere + ": must be an object");
      MarkerClass cls;
      try {
        cls = parse_marker_class(string_field(mj, "class", mwhere));
      } catch (const ValidationError& e) {
        throw ValidationError(mwhere + ": " + e.what());
      }
      const json& corners = field(mj, "corners", mwhere);
      if (!corners.is_array() || corners.size() != 4) {
        throw ValidationError(mwhere + ": marker needs exactly 4 corners, got " +
                              std::to_string(corners.is_array() ? corners.size() : 0));
      }
      std::array<Point, 4> pts{};
      for (std::size_t k = 0; k < 4; ++k) {
        pts[k] = parse_point(corners[k], mwhere, img.width, img.height);
      }
      try {
        img.markers.emplace_back(cls, pts);
      } catch (const ValidationError& e) {
        throw ValidationError(mwhere + ": " + e.what());
      }
    }
  }
  return img;
}

json point_json(const Point& p) { return json::array({p.x, p.y}); }

}  // namespace

LoadResult parse_annotations(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("annotation JSON parse error at byte " + std::to_string(e.byte) + ": " +
                     e.what());
  }
  if (!doc.is_object()) throw ValidationError("annotation file must be a JSON object");
  const json& version = field(doc, "version", "annotation file");
  if (!version.is_number_integer() || version.get<int>() != kAnnotationSchemaVersion) {
    throw ValidationError("unsupported annotation schema version " + version.dump());
  }
  const json& images = field(doc, "images", "annotation file");
  if (!images.is_array()) throw ValidationError("'images' must be an array");

  LoadResult result;
  std::set<std::string> seen;
  result.images.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    AnnotatedImage img = parse_image(images[i], i, result);
    if (!seen.insert(img.id).second) throw ValidationError("duplicate image id '" + img.id + "'");
    result.images.push_back(std::move(img));
  }
  return result;
}

LoadResult load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text_file(path));
}

std::string serialize_annotations(const std::vector<AnnotatedImage>& images) {
  json arr = json::array();
  for (const AnnotatedImage& img : images) {
    json regions = json::array();
    for (const AnnotatedRegion& r : img.regions) {
      json poly = json::array();
      for (const Point& p : r.polygon.vertices()) poly.push_back(point_json(p));
      regions.push_back({{"class", to_string(r.cls)}, {"instance", r.instance_id}, {"polygon", poly}});
    }
    json markers = json::array();
    for (const MarkerAnnotation& m : img.markers) {
      json corners = json::array();
      for (const Point& p : m.corners()) corners.push_back(point_json(p));
      markers.push_back({{"class", to_string(m.marker_class())}, {"corners", corners}});
    }
    arr.push_back({{"id", img.id},
                   {"path", img.path},
                   {"width", img.width},
                   {"height", img.height},
                   {"group_id", img.group_id},
                   {"meta",
                    {{"stage", to_string(img.meta.stage)},
                     {"lighting", to_string(img.meta.lighting)},
                     {"moisture", to_string(img.meta.moisture)},
                     {"location", img.meta.location},
                     {"session", img.meta.session_id}}},
                   {"regions", regions},
                   {"markers", markers}});
  }
  json doc = {{"version", kAnnotationSchemaVersion}, {"images", arr}};
  return doc.dump(1) + "\n";
}

void write_annotations(const std::filesystem::path& path,
                       const std::vector<AnnotatedImage>& images) {
  write_text_file(path, serialize_annotations(images));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace beet
