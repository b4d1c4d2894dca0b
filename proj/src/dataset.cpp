#include "beet/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "beet/error.hpp"
#include "beet/parallel.hpp"
#include "beet/raster.hpp"
#include "json.hpp"

namespace beet {
namespace {

using nlohmann::json;

// Uniform draw in [0, n) by rejection; std::uniform_int_distribution is not
// specified bit-exactly across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

json row_json(const StageStatsRow& r) {
  return {{"images", r.images},
          {"beets", r.beets},
          {"locations", r.locations},
          {"sessions", r.sessions},
          {"beets_per_image", r.beets_per_image},
          {"beet_ratio_percent", r.beet_ratio_percent}};
}

StageStatsRow row_from_json(const json& j) {
  StageStatsRow r;
  r.images = j.at("images").get<std::size_t>();
  r.beets = j.at("beets").get<std::size_t>();
  r.locations = j.at("locations").get<std::size_t>();
  r.sessions = j.at("sessions").get<std::size_t>();
  r.beets_per_image = j.at("beets_per_image").get<double>();
  r.beet_ratio_percent = j.at("beet_ratio_percent").get<double>();
  return r;
}

std::vector<std::string> string_list(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw ValidationError(std::string("split file: '") + key + "' must be an array");
  }
  std::vector<std::string> out;
  for (const json& v : *it) {
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_number_integer()) {
      out.push_back(std::to_string(v.get<long long>()));
    } else {
      throw ValidationError(std::string("split file: '") + key + "' holds a non-id value");
    }
  }
  return out;
}

}  // namespace

DatasetSplit make_split(std::span<const AnnotatedImage> images, SplitRatios ratios,
                        std::uint64_t seed) {
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must be non-negative and sum to 1");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].group_id.empty()) {
      throw ValidationError("image '" + images[i].id + "' has no group_id");
    }
    groups[images[i].group_id].push_back(i);
  }
  const double total = static_cast<double>(images.size());
  const double target_train = ratios.train * total;
  const double target_val = ratios.val * total;
  const double target_test = ratios.test * total;
  const double largest_target = std::max({target_train, target_val, target_test});

  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> order;
  order.reserve(groups.size());
  for (const auto& g : groups) {
    if (static_cast<double>(g.second.size()) > largest_target) {
      throw ValidationError("group '" + g.first + "' (" + std::to_string(g.second.size()) +
                            " images) is larger than every target partition");
    }
    order.push_back(&g);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[bounded(rng, i)]);
  }

  // 0 = train, 1 = val, 2 = test
  std::vector<int> assignment(images.size(), 0);
  double val_count = 0.0;
  double test_count = 0.0;
  for (const auto* g : order) {
    const double size = static_cast<double>(g->second.size());
    int set = 0;
    if (val_count + size / 2.0 < target_val) {
      set = 1;
      val_count += size;
    } else if (test_count + size / 2.0 < target_test) {
      set = 2;
      test_count += size;
    }
    for (std::size_t idx : g->second) assignment[idx] = set;
  }

  DatasetSplit split;
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto& dst = assignment[i] == 0 ? split.train : (assignment[i] == 1 ? split.val : split.test);
    dst.push_back(images[i].id);
  }
  return split;
}

std::string serialize_split(const DatasetSplit& split) {
  json doc = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
  return doc.dump(1) + "\n";
}

DatasetSplit parse_split(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("split JSON parse error at byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ValidationError("split file must be a JSON object");
  DatasetSplit split{string_list(doc, "train"), string_list(doc, "val"), string_list(doc, "test")};
  std::set<std::string> seen;
  for (const auto* set : {&split.train, &split.val, &split.test}) {
    for (const std::string& id : *set) {
      if (!seen.insert(id).second) {
        throw ValidationError("split file lists image '" + id + "' more than once");
      }
    }
  }
  return split;
}

StageStatsTable dataset_stats(std::span<const AnnotatedImage> images) {
  StageStatsTable table;
  std::array<std::set<std::string>, 3> locations;
  std::array<std::set<int>, 3> sessions;
  std::set<std::string> all_locations;
  std::set<int> all_sessions;
  for (const AnnotatedImage& img : images) {
    const auto s = static_cast<std::size_t>(img.meta.stage);
    std::set<int> instances;
    for (const AnnotatedRegion& r : img.regions) instances.insert(r.instance_id);
    table.stages[s].images += 1;
    table.stages[s].beets += instances.size();
    locations[s].insert(img.meta.location);
    sessions[s].insert(img.meta.session_id);
    all_locations.insert(img.meta.location);
    all_sessions.insert(img.meta.session_id);
  }
  for (std::size_t s = 0; s < 3; ++s) {
    table.total.images += table.stages[s].images;
    table.total.beets += table.stages[s].beets;
    table.stages[s].locations = locations[s].size();
    table.stages[s].sessions = sessions[s].size();
  }
  table.total.locations = all_locations.size();
  table.total.sessions = all_sessions.size();
  auto finish = [&](StageStatsRow& r) {
    r.beets_per_image = r.images ? static_cast<double>(r.beets) / r.images : 0.0;
    r.beet_ratio_percent =
        table.total.beets ? 100.0 * static_cast<double>(r.beets) / table.total.beets : 0.0;
  };
  for (auto& r : table.stages) finish(r);
  finish(table.total);
  return table;
}

std::string stats_to_json(const StageStatsTable& table) {
  json stages = json::object();
  for (Stage s : kAllStages) {
    stages[std::string(to_string(s))] = row_json(table.stages[static_cast<std::size_t>(s)]);
  }
  json doc = {{"stages", stages}, {"total", row_json(table.total)}};
  return doc.dump(1) + "\n";
}

StageStatsTable stats_from_json(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    StageStatsTable table;
    for (Stage s : kAllStages) {
      table.stages[static_cast<std::size_t>(s)] =
          row_from_json(doc.at("stages").at(std::string(to_string(s))));
    }
    table.total = row_from_json(doc.at("total"));
    return table;
  } catch (const json::parse_error& e) {
    throw ParseError("stats JSON parse error at byte " + std::to_string(e.byte));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("stats JSON: ") + e.what());
  }
}

std::string stats_to_csv(const StageStatsTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "stage,locations,sessions,images,beets,beets_per_image,beet_ratio_percent\n";
  auto line = [&](std::string_view name, const StageStatsRow& r) {
    out << name << ',' << r.locations << ',' << r.sessions << ',' << r.images << ',' << r.beets
        << ',' << r.beets_per_image << ',' << r.beet_ratio_percent << '\n';
  };
  for (Stage s : kAllStages) line(to_string(s), table.stages[static_cast<std::size_t>(s)]);
  line("Total", table.total);
  return out.str();
}

std::string stats_to_text(const StageStatsTable& table) {
  std::string out = "Stage      Loc  Rec    Img  Beets   B/I   Ratio\n";
  char buf[128];
  auto line = [&](std::string_view name, const StageStatsRow& r, bool with_ratio) {
    std::snprintf(buf, sizeof buf, "%-9.*s %4zu %4zu %6zu %6zu %5.1f", static_cast<int>(name.size()),
                  name.data(), r.locations, r.sessions, r.images, r.beets, r.beets_per_image);
    out += buf;
    if (with_ratio) {
      std::snprintf(buf, sizeof buf, " %6.1f", r.beet_ratio_percent);
      out += buf;
    }
    out += '\n';
  };
  for (Stage s : kAllStages) line(to_string(s), table.stages[static_cast<std::size_t>(s)], true);
  line("Total", table.total, false);
  return out;
}

MaskSource rasterized_annotations() {
  return [](const AnnotatedImage& img) -> std::optional<SemanticMask> {
    return rasterize(img.regions, img.width, img.height);
  };
}

LabelDistribution label_pixel_distribution(std::span<const AnnotatedImage> images,
                                           const MaskSource& masks) {
  LabelDistribution dist;
  dist.per_image.resize(images.size());
  parallel_for(images.size(), [&](std::size_t i) {
    const AnnotatedImage& img = images[i];
    std::optional<SemanticMask> mask = masks(img);
    if (!mask) throw ValidationError("no mask available for image '" + img.id + "'");
    if (mask->width() != img.width || mask->height() != img.height) {
      throw ValidationError("mask for image '" + img.id + "' has the wrong size");
    }
    ImageLabelCounts& entry = dist.per_image[i];
    entry.image_id = img.id;
    entry.stage = img.meta.stage;
    for (std::uint8_t v : mask->cells()) entry.counts[v] += 1;
  });
  for (const ImageLabelCounts& e : dist.per_image) {
    auto& acc = dist.per_stage[static_cast<std::size_t>(e.stage)];
    for (int c = 0; c < kNumClasses; ++c) acc[c] += e.counts[c];
  }
  return dist;
}

std::string label_distribution_stage_csv(const LabelDistribution& dist) {
  std::ostringstream out;
  out << "stage,class,pixels\n";
  for (Stage s : kAllStages) {
    for (SemanticClass c : kAllClasses) {
      out << to_string(s) << ',' << to_string(c) << ','
          << dist.per_stage[static_cast<std::size_t>(s)][index_of(c)] << '\n';
    }
  }
  return out.str();
}

std::string label_distribution_image_csv(const LabelDistribution& dist) {
  std::ostringstream out;
  out.precision(10);
  out << "image_id,stage";
  for (SemanticClass c : kAllClasses) out << ',' << to_string(c);
  out << '\n';
  for (const ImageLabelCounts& e : dist.per_image) {
    std::uint64_t total = 0;
    for (auto n : e.counts) total += n;
    out << e.image_id << ',' << to_string(e.stage);
    for (auto n : e.counts) {
      out << ',' << (total ? static_cast<double>(n) / static_cast<double>(total) : 0.0);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace beet
