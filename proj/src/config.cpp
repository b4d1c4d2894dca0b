#include "beet/config.hpp"

#include <cmath>

#include "beet/annotations.hpp"
#include "beet/error.hpp"
#include "json.hpp"

namespace beet {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (std::string_view k : keys) known = known || it.key() == k;
    if (!known) throw ValidationError(where + ": unknown key '" + it.key() + "'");
  }
}

double positive_number(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!(std::isfinite(d) && d > 0.0)) throw ValidationError(where + "." + key + " must be positive");
  return d;
}

double ratio(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_number() || v.get<double>() < 0.0) {
    throw ValidationError(std::string("config split.") + key + " must be a non-negative number");
  }
  return v.get<double>();
}

}  // namespace

InspectConfig ToolConfig::inspect_config() const {
  InspectConfig c;
  c.tier = tier;
  c.margin_frac = margin_frac;
  c.marker_sizes = marker_sizes;
  c.residual_bound = residual_bound;
  return c;
}

ToolConfig parse_tool_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config JSON parse error at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j, {"markers", "tier", "margin_frac", "residual_bound", "adapter", "split",
                     "dice_epsilon", "workers"},
                 "config");
  ToolConfig c;
  try {
    if (j.contains("markers")) {
      const json& m = j["markers"];
      if (!m.is_object()) throw ValidationError("config.markers must be an object");
      for (auto it = m.begin(); it != m.end(); ++it) {
        const MarkerClass cls = parse_marker_class(it.key());
        const std::string where = "config.markers." + it.key();
        reject_unknown(*it, {"length_mm", "width_mm"}, where);
        PhysicalSize size{positive_number(*it, "length_mm", where),
                          positive_number(*it, "width_mm", where)};
        c.marker_sizes[static_cast<std::size_t>(cls)] = size;
      }
    }
    if (j.contains("tier")) c.tier = parse_tier(j["tier"].get<std::string>());
    if (j.contains("margin_frac")) {
      c.margin_frac = j["margin_frac"].get<double>();
      if (!(c.margin_frac >= 0.0)) throw ValidationError("config.margin_frac must be >= 0");
    }
    if (j.contains("residual_bound")) c.residual_bound = positive_number(j, "residual_bound", "config");
    if (j.contains("adapter")) {
      const json& a = j["adapter"];
      reject_unknown(a, {"command", "timeout_s"}, "config.adapter");
      c.adapter_command = a.value("command", std::string());
      if (a.contains("timeout_s")) {
        c.adapter_timeout = std::chrono::milliseconds(
            std::llround(positive_number(a, "timeout_s", "config.adapter") * 1000.0));
      }
    }
    if (j.contains("split")) {
      const json& s = j["split"];
      reject_unknown(s, {"train", "val", "test", "seed"}, "config.split");
      c.split = {ratio(s, "train", c.split.train), ratio(s, "val", c.split.val),
                 ratio(s, "test", c.split.test)};
      if (std::abs(c.split.train + c.split.val + c.split.test - 1.0) > 1e-9) {
        throw ValidationError("config.split ratios must sum to 1");
      }
      if (s.contains("seed")) c.seed = s["seed"].get<std::uint64_t>();
    }
    if (j.contains("dice_epsilon")) c.dice_epsilon = positive_number(j, "dice_epsilon", "config");
    if (j.contains("workers")) {
      c.workers = j["workers"].get<int>();
      if (c.workers < 0) throw ValidationError("config.workers must be >= 0");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

ToolConfig load_tool_config(const std::filesystem::path& path) {
  return parse_tool_config(read_text_file(path));
}

std::string tool_config_to_json(const ToolConfig& c) {
  json j;
  json markers = json::object();
  for (MarkerClass m : {MarkerClass::Ruler, MarkerClass::Sign}) {
    if (const auto& s = c.marker_sizes[static_cast<std::size_t>(m)]) {
      markers[std::string(to_string(m))] = {{"length_mm", s->length_mm}, {"width_mm", s->width_mm}};
    }
  }
  j["markers"] = std::move(markers);
  j["tier"] = std::string(to_string(c.tier));
  j["margin_frac"] = c.margin_frac;
  j["residual_bound"] = c.residual_bound;
  j["adapter"] = {{"command", c.adapter_command},
                  {"timeout_s", static_cast<double>(c.adapter_timeout.count()) / 1000.0}};
  j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test},
                {"seed", c.seed}};
  j["dice_epsilon"] = c.dice_epsilon;
  j["workers"] = c.workers;
  return j.dump(2);
}

}  // namespace beet
