#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "beet/adapter.hpp"
#include "beet/annotations.hpp"
#include "beet/backends.hpp"
#include "beet/dataset.hpp"
#include "beet/detection_eval.hpp"
#include "beet/error.hpp"
#include "beet/metrics.hpp"
#include "beet/png_io.hpp"
#include "beet/raster.hpp"
#include "beet/synthesis.hpp"
#include "json.hpp"

namespace beet::cli {

using nlohmann::json;

void Console::warn(const std::string& message) {
  ++warnings;
  err << "warning: " << message << '\n';
}

ToolConfig resolve_config(const CommonOptions& common) {
  ToolConfig c = common.config ? load_tool_config(*common.config) : ToolConfig{};
  if (common.workers) {
    if (*common.workers < 0) throw ValidationError("--workers must be >= 0");
    c.workers = *common.workers;
  }
  if (common.seed) c.seed = *common.seed;
  if (common.tier) c.tier = parse_tier(*common.tier);
  if (common.margin) {
    if (!(*common.margin >= 0.0)) throw ValidationError("--margin must be >= 0");
    c.margin_frac = *common.margin;
  }
  if (common.adapter) c.adapter_command = *common.adapter;
  return c;
}

std::string file_stem(const std::string& image_id) {
  std::string s = image_id;
  for (char& ch : s) {
    const unsigned char u = static_cast<unsigned char>(ch);
    if (!std::isalnum(u) && ch != '-' && ch != '_' && ch != '.') ch = '_';
  }
  if (s.empty() || s == "." || s == "..") s = "_" + s;
  return s;
}

namespace {

void apply_threads(const ToolConfig& config) {
#ifdef _OPENMP
  if (config.workers > 0) omp_set_num_threads(config.workers);
#else
  (void)config;
#endif
}

std::vector<AnnotatedImage> load_dataset(const fs::path& path, Console& console) {
  LoadResult loaded = load_annotations(path);
  for (const std::string& w : loaded.warnings) console.warn(w);
  if (loaded.dropped_polygons > 0) {
    console.warn(std::to_string(loaded.dropped_polygons) + " degenerate polygon(s) dropped");
  }
  return std::move(loaded.images);
}

fs::path require_out(const CommonOptions& common, const char* what) {
  if (common.out.empty()) throw ValidationError(std::string("--out is required: ") + what);
  return common.out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::map<std::string, std::size_t> index_by_id(const std::vector<AnnotatedImage>& images) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < images.size(); ++i) index[images[i].id] = i;
  return index;
}

// One parsed prediction line, with the image it refers to.
struct PredictionLine {
  std::size_t image = 0;
  json value;
  int lineno = 0;
};

std::vector<PredictionLine> read_predictions(const fs::path& path,
                                             const std::map<std::string, std::size_t>& index) {
  std::istringstream in(read_text_file(path));
  std::vector<PredictionLine> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": malformed JSON at byte " + std::to_string(e.byte));
    }
    if (!j.is_object() || !j.contains("image_id") || !j["image_id"].is_string()) {
      throw ValidationError(where + ": expected an object with a string image_id");
    }
    const std::string id = j["image_id"].get<std::string>();
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError(where + ": unknown image_id '" + id + "'");
    out.push_back({it->second, std::move(j), lineno});
  }
  return out;
}

double score_of(const PredictionLine& p, const std::string& where) {
  auto it = p.value.find("score");
  if (it == p.value.end() || !it->is_number()) throw ValidationError(where + ": missing score");
  const double s = it->get<double>();
  if (!(s >= 0.0 && s <= 1.0)) throw ValidationError(where + ": score outside [0, 1]");
  return s;
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_relative() ? base_dir / path : path;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---- evaluate: segmentation -------------------------------------------------

void evaluate_seg(const EvaluateOptions& opt, const ToolConfig& config,
                  const std::vector<AnnotatedImage>& images, const CommonOptions& common,
                  Console& console) {
  const auto index = index_by_id(images);
  const auto preds = read_predictions(opt.predictions, index);
  const fs::path base = opt.predictions.parent_path();

  std::vector<int> seen(images.size(), 0);
  for (const PredictionLine& p : preds) {
    if (seen[p.image]++) {
      throw ValidationError("duplicate prediction for image '" + images[p.image].id + "'");
    }
  }

  std::vector<ConfusionTotals> totals(preds.size());
  std::vector<SampleScore> scores(preds.size());
  std::vector<double> dice(preds.size());
  parallel_for(preds.size(), [&](std::size_t k) {
    const PredictionLine& p = preds[k];
    const AnnotatedImage& img = images[p.image];
    const std::string where = opt.predictions.filename().string() + ":" + std::to_string(p.lineno);
    auto it = p.value.find("mask");
    if (it == p.value.end() || !it->is_string()) throw ValidationError(where + ": missing mask");
    const SemanticMask pred = read_semantic_png(resolve(base, it->get<std::string>()));
    if (pred.width() != img.width || pred.height() != img.height) {
      throw ValidationError(where + ": mask is " + std::to_string(pred.width()) + "x" +
                            std::to_string(pred.height()) + ", image '" + img.id + "' is " +
                            std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    const SemanticMask gt = rasterize(img.regions, img.width, img.height);
    totals[k] = confusion(pred, gt);
    scores[k] = {img.id, miou(totals[k]).mean, img.meta};
    dice[k] = dice_loss(ProbabilityRaster::one_hot(pred), gt, config.dice_epsilon);
  });

  const std::size_t missing = std::count(seen.begin(), seen.end(), 0);
  if (missing > 0) {
    console.warn(std::to_string(missing) + " image(s) have no prediction and were not evaluated");
  }
  if (preds.empty()) throw ValidationError("no predictions to evaluate");

  const MiouMode mode = opt.per_sample ? MiouMode::PerSample : MiouMode::Aggregate;
  const MiouResult result = miou(totals, mode);
  const MetaBreakdown breakdown = meta_breakdown(scores);
  double dice_mean = 0.0;
  for (double d : dice) dice_mean += d;
  dice_mean /= static_cast<double>(dice.size());

  console.out << iou_table_text(result);
  console.out << "images " << preds.size() << "  dice loss (one-hot) " << fixed(dice_mean, 6)
              << '\n';

  if (!common.out.empty()) {
    ensure_dir(common.out);
    write_text_file(common.out / "iou_table.csv", iou_table_csv(result));
    write_text_file(common.out / "meta_breakdown.csv", meta_breakdown_csv(breakdown));
    json per_class = json::object();
    for (SemanticClass c : kAllClasses) {
      const auto& v = result.per_class[index_of(c)];
      per_class[std::string(to_string(c))] = v ? json(*v) : json(nullptr);
    }
    write_json(common.out / "evaluation.json",
               {{"task", "seg"},
                {"mode", opt.per_sample ? "per_sample" : "aggregate"},
                {"images", preds.size()},
                {"miou", result.mean},
                {"per_class", per_class},
                {"dice_loss", dice_mean},
                {"dice_epsilon", config.dice_epsilon}});
  }
}

// ---- evaluate: detection ----------------------------------------------------

template <typename G, typename IouFn>
void report_map(std::span<const Detection<G>> dets, std::span<const GroundTruth<G>> gts, IouFn iou,
                const std::function<std::string(int)>& label_name, const char* task,
                const CommonOptions& common, Console& console) {
  const MapResult result = evaluate_map(dets, gts, iou);
  console.out << std::left << std::setw(8) << "class" << std::right << std::setw(8) << "AP50"
              << std::setw(8) << "AP75" << std::setw(10) << "AP50-95" << '\n';
  std::ostringstream csv;
  csv.precision(17);
  csv << "class,ap50,ap75,ap50_95\n";
  json per_class = json::array();
  for (const ClassAp& c : result.per_class) {
    const std::string name = label_name(c.label);
    console.out << std::left << std::setw(8) << name << std::right << std::setw(8)
                << fixed(100.0 * c.ap[0], 1) << std::setw(8) << fixed(100.0 * c.ap[5], 1)
                << std::setw(10) << fixed(100.0 * c.map, 1) << '\n';
    csv << name << ',' << c.ap[0] << ',' << c.ap[5] << ',' << c.map << '\n';
    per_class.push_back({{"class", name},
                         {"ap", std::vector<double>(c.ap.begin(), c.ap.end())},
                         {"map50_95", c.map}});
  }
  console.out << std::left << std::setw(8) << "all" << std::right << std::setw(26)
              << fixed(100.0 * result.map, 1) << '\n';
  csv << "all,,," << result.map << '\n';

  if (common.out.empty()) return;
  ensure_dir(common.out);
  write_text_file(common.out / "ap_table.csv", csv.str());
  for (const ClassAp& c : result.per_class) {
    const DetectionProblem problem = build_problem(dets, gts, iou, c.label);
    write_text_file(common.out / ("pr_" + label_name(c.label) + "_iou50.csv"),
                    pr_curve_csv(pr_curve(problem, 0.5)));
  }
  write_json(common.out / "evaluation.json", {{"task", task},
                                              {"detections", dets.size()},
                                              {"ground_truths", gts.size()},
                                              {"map50_95", result.map},
                                              {"per_class", per_class}});
}

AxisAlignedBox box_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ValidationError(where + ": box must be [x0,y0,x1,y1]");
  for (const json& v : j) {
    if (!v.is_number()) throw ValidationError(where + ": box must be numeric");
  }
  AxisAlignedBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw ValidationError(where + ": empty box");
  return b;
}

void evaluate_det(const EvaluateOptions& opt, const std::vector<AnnotatedImage>& images,
                  const CommonOptions& common, Console& console) {
  const auto index = index_by_id(images);
  const auto preds = read_predictions(opt.predictions, index);
  const fs::path base = opt.predictions.parent_path();
  const auto name = [](int) { return std::string("Beet"); };

  bool masks = false;
  if (!preds.empty()) masks = preds.front().value.contains("mask");
  for (const PredictionLine& p : preds) {
    const std::string where = opt.predictions.filename().string() + ":" + std::to_string(p.lineno);
    if (p.value.contains("mask") != masks || p.value.contains("box") == masks) {
      throw ValidationError(where + ": every line needs exactly one of box or mask, consistently");
    }
    if (p.value.contains("class") && p.value["class"] != "Beet") {
      throw ValidationError(where + ": instance predictions are class Beet");
    }
  }

  const std::vector<AnnotatedImage> inst = instance_dataset(images);
  if (masks) {
    std::vector<GroundTruth<BinaryMask>> gts;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      for (const AnnotatedRegion& r : inst[i].regions) {
        gts.push_back({rasterize_polygon(r.polygon, inst[i].width, inst[i].height), 0, i});
      }
    }
    std::vector<Detection<BinaryMask>> dets(preds.size());
    parallel_for(preds.size(), [&](std::size_t k) {
      const PredictionLine& p = preds[k];
      const std::string where =
          opt.predictions.filename().string() + ":" + std::to_string(p.lineno);
      if (!p.value["mask"].is_string()) throw ValidationError(where + ": mask must be a path");
      BinaryMask m = read_binary_png(resolve(base, p.value["mask"].get<std::string>()));
      const AnnotatedImage& img = images[p.image];
      if (m.width() != img.width || m.height() != img.height) {
        throw ValidationError(where + ": mask size differs from image '" + img.id + "'");
      }
      dets[k] = {std::move(m), 0, score_of(p, where), p.image};
    });
    report_map<BinaryMask>(dets, gts, mask_iou, name, "det", common, console);
  } else {
    std::vector<GroundTruth<AxisAlignedBox>> gts;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      for (const AnnotatedRegion& r : inst[i].regions) {
        const auto b = mask_bounds(rasterize_polygon(r.polygon, inst[i].width, inst[i].height));
        if (b) gts.push_back({*b, 0, i});
      }
    }
    std::vector<Detection<AxisAlignedBox>> dets;
    for (const PredictionLine& p : preds) {
      const std::string where =
          opt.predictions.filename().string() + ":" + std::to_string(p.lineno);
      dets.push_back({box_of(p.value["box"], where), 0, score_of(p, where), p.image});
    }
    report_map<AxisAlignedBox>(dets, gts, aabb_iou, name, "det", common, console);
  }
}

void evaluate_obb(const EvaluateOptions& opt, const std::vector<AnnotatedImage>& images,
                  const CommonOptions& common, Console& console) {
  const auto index = index_by_id(images);
  const auto preds = read_predictions(opt.predictions, index);

  std::vector<GroundTruth<OrientedBox>> gts;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const MarkerAnnotation& m : images[i].markers) {
      gts.push_back({obb_from_corners(m.corners()), static_cast<int>(m.marker_class()), i});
    }
  }
  std::vector<Detection<OrientedBox>> dets;
  for (const PredictionLine& p : preds) {
    const std::string where = opt.predictions.filename().string() + ":" + std::to_string(p.lineno);
    const json& v = p.value;
    if (!v.contains("class") || !v["class"].is_string()) {
      throw ValidationError(where + ": missing marker class");
    }
    const MarkerClass cls = parse_marker_class(v["class"].get<std::string>());
    if (!v.contains("obb") || !v["obb"].is_object()) throw ValidationError(where + ": missing obb");
    const json& o = v["obb"];
    double f[5];
    const char* keys[5] = {"cx", "cy", "w", "h", "angle"};
    for (int k = 0; k < 5; ++k) {
      if (!o.contains(keys[k]) || !o[keys[k]].is_number()) {
        throw ValidationError(where + ": obb." + keys[k] + " must be a number");
      }
      f[k] = o[keys[k]].get<double>();
    }
    dets.push_back({OrientedBox({f[0], f[1]}, f[2], f[3], f[4]), static_cast<int>(cls),
                    score_of(p, where), p.image});
  }
  const auto name = [](int label) {
    return std::string(to_string(static_cast<MarkerClass>(label)));
  };
  report_map<OrientedBox>(dets, gts, obb_iou, name, "obb", common, console);
}

// ---- inspect ----------------------------------------------------------------

struct InspectTotals {
  std::array<std::uint64_t, kNumClasses> areas_px{};
  std::array<double, kNumClasses> areas_mm2{};
  double mass_g = 0.0;
  std::size_t beets = 0;
  std::size_t with_scale = 0;
  std::size_t with_mass = 0;
};

json areas_json(const auto& areas) {
  json j = json::object();
  for (SemanticClass c : kAllClasses) j[std::string(to_string(c))] = areas[index_of(c)];
  return j;
}

}  // namespace

void cmd_stats(const fs::path& dataset, bool label_distribution, const CommonOptions& common,
               Console& console) {
  const ToolConfig config = resolve_config(common);
  apply_threads(config);
  const std::vector<AnnotatedImage> images = load_dataset(dataset, console);
  const StageStatsTable table = dataset_stats(images);
  console.out << stats_to_text(table);
  if (common.out.empty()) return;
  ensure_dir(common.out);
  write_text_file(common.out / "stats.json", stats_to_json(table));
  write_text_file(common.out / "stats.csv", stats_to_csv(table));
  if (label_distribution) {
    const LabelDistribution dist = label_pixel_distribution(images, rasterized_annotations());
    write_text_file(common.out / "label_distribution_stage.csv",
                    label_distribution_stage_csv(dist));
    write_text_file(common.out / "label_distribution_images.csv",
                    label_distribution_image_csv(dist));
  }
}

void cmd_convert(const fs::path& dataset, const std::optional<fs::path>& skip_report,
                 const CommonOptions& common, Console& console) {
  const ToolConfig config = resolve_config(common);
  apply_threads(config);
  const fs::path out = require_out(common, "path of the instance dataset to write");
  const std::vector<AnnotatedImage> images = load_dataset(dataset, console);
  const SynthesisReport report = write_instance_dataset(images, out);

  console.out << "instances " << report.instances.size() << "  skipped " << report.skipped.size()
              << "  dropped regions " << report.dropped.size() << '\n';
  for (const SkippedInstance& s : report.skipped) {
    console.warn("image '" + s.image_id + "' instance " + std::to_string(s.instance_id) +
                 " has only Leaf regions; skipped");
  }
  for (const DroppedRegion& d : report.dropped) {
    console.warn("image '" + d.image_id + "' instance " + std::to_string(d.instance_id) +
                 " region " + std::to_string(d.region_index) + " (" +
                 std::string(to_string(d.cls)) + ") does not overlap the instance; dropped");
  }
  if (skip_report) {
    json skipped = json::array();
    for (const SkippedInstance& s : report.skipped) {
      skipped.push_back({{"image_id", s.image_id}, {"instance_id", s.instance_id}});
    }
    json dropped = json::array();
    for (const DroppedRegion& d : report.dropped) {
      dropped.push_back({{"image_id", d.image_id},
                         {"instance_id", d.instance_id},
                         {"region_index", d.region_index},
                         {"class", std::string(to_string(d.cls))}});
    }
    write_json(*skip_report, {{"instances", report.instances.size()},
                              {"skipped", skipped},
                              {"dropped", dropped}});
  }
}

void cmd_split(const fs::path& dataset, const SplitOptions& split, const CommonOptions& common,
               Console& console) {
  ToolConfig config = resolve_config(common);
  if (split.train) config.split.train = *split.train;
  if (split.val) config.split.val = *split.val;
  if (split.test) config.split.test = *split.test;
  const fs::path out = require_out(common, "path of the split file to write");
  const std::vector<AnnotatedImage> images = load_dataset(dataset, console);
  const DatasetSplit result = make_split(images, config.split, config.seed);
  write_text_file(out, serialize_split(result));
  console.out << "train " << result.train.size() << "  val " << result.val.size() << "  test "
              << result.test.size() << "  (seed " << config.seed << ")\n";
}

EvalTask parse_eval_task(const std::string& name) {
  if (name == "seg") return EvalTask::Seg;
  if (name == "det") return EvalTask::Det;
  if (name == "obb") return EvalTask::Obb;
  throw ValidationError("unknown task '" + name + "' (expected seg, det or obb)");
}

void cmd_evaluate(const EvaluateOptions& options, const CommonOptions& common, Console& console) {
  const ToolConfig config = resolve_config(common);
  apply_threads(config);
  const std::vector<AnnotatedImage> images = load_dataset(options.dataset, console);
  switch (options.task) {
    case EvalTask::Seg: evaluate_seg(options, config, images, common, console); break;
    case EvalTask::Det: evaluate_det(options, images, common, console); break;
    case EvalTask::Obb: evaluate_obb(options, images, common, console); break;
  }
}

void cmd_calibrate_mass(const fs::path& samples, const CommonOptions& common, Console& console) {
  const fs::path out = require_out(common, "path of the mass model to write");
  const std::vector<MassSample> data = parse_mass_samples_csv(read_text_file(samples));
  const MassModel model = calibrate_mass(data);
  write_text_file(out, mass_model_to_json(model) + "\n");
  console.out << "samples " << model.samples << "  m_bar " << std::setprecision(10) << model.m_bar
              << " g/mm^2  mean rel. error " << fixed(model.mean_rel_error, 4)
              << "  max rel. error " << fixed(model.max_rel_error, 4) << '\n';
}

void cmd_inspect(const InspectOptions& options, const CommonOptions& common, Console& console) {
  const ToolConfig config = resolve_config(common);
  const fs::path out = require_out(common, "output directory for reports");
  if (common.oracle == !config.adapter_command.empty()) {
    throw ValidationError("inspect needs exactly one backend: --oracle or --adapter");
  }
  std::vector<AnnotatedImage> images = load_dataset(options.dataset, console);
  const fs::path base = options.dataset.parent_path();

  std::vector<std::size_t> selected;
  if (options.image_ids.empty()) {
    for (std::size_t i = 0; i < images.size(); ++i) selected.push_back(i);
  } else {
    const auto index = index_by_id(images);
    for (const std::string& id : options.image_ids) {
      auto it = index.find(id);
      if (it == index.end()) throw ValidationError("unknown image_id '" + id + "'");
      selected.push_back(it->second);
    }
  }
  std::set<std::string> stems;
  for (std::size_t i : selected) {
    if (!stems.insert(file_stem(images[i].id)).second) {
      throw ValidationError("image ids collide after file-name sanitizing: '" + images[i].id + "'");
    }
  }

  InspectConfig icfg = config.inspect_config();
  if (options.mass_model) icfg.mass = mass_model_from_json(read_text_file(*options.mass_model));
  ensure_dir(out);

  int workers = config.workers > 0 ? config.workers
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers),
                                                   std::max<std::size_t>(selected.size(), 1)));

  std::unique_ptr<OracleBackend> oracle;
  std::vector<std::unique_ptr<ExternalAdapter>> adapters;
  if (common.oracle) {
    oracle = std::make_unique<OracleBackend>(images);
  } else {
    for (int w = 0; w < workers; ++w) {
      adapters.push_back(std::make_unique<ExternalAdapter>(
          AdapterConfig{config.adapter_command, config.adapter_timeout, {}}));
    }
  }

  std::mutex mutex;
  std::vector<std::string> errors;
  std::vector<std::optional<InspectionReport>> reports(selected.size());
  std::atomic<std::size_t> next{0};
  auto work = [&](int worker) {
#ifdef _OPENMP
    if (workers > 1) omp_set_num_threads(1);
#endif
    const Backends backends = oracle ? oracle->backends() : adapters[worker]->backends();
    for (std::size_t k = next++; k < selected.size(); k = next++) {
      const AnnotatedImage& img = images[selected[k]];
      try {
        ImageRef ref{img.id, resolve(base, img.path), img.width, img.height, nullptr};
        RgbImage raster;
        std::error_code ec;
        if (img.path.empty() || !fs::exists(ref.path, ec)) {
          std::lock_guard<std::mutex> lock(mutex);
          console.warn("image file for '" + img.id + "' not found; cutting patches from a gray canvas");
        } else {
          try {
            raster = read_rgb_png(ref.path);
            if (raster.width != img.width || raster.height != img.height) {
              throw ValidationError("image file " + ref.path.string() + " is " +
                                    std::to_string(raster.width) + "x" +
                                    std::to_string(raster.height) + ", annotation says " +
                                    std::to_string(img.width) + "x" + std::to_string(img.height));
            }
            ref.raster = &raster;
          } catch (const IoError& e) {
            std::lock_guard<std::mutex> lock(mutex);
            console.warn("cannot decode '" + img.id + "' (" + e.what() +
                         "); cutting patches from a gray canvas");
          }
        }
        if (!ref.raster) {
          raster = RgbImage(img.width, img.height, kLetterboxGray);
          ref.raster = &raster;
        }
        InspectionReport report = inspect_image(ref, backends, icfg);
        const std::string stem = file_stem(img.id);
        write_text_file(out / (stem + ".json"), report_to_json(report) + "\n");
        write_semantic_png(out / (stem + "_fused.png"), report.fused);
        report.fused = SemanticMask();
        reports[k] = std::move(report);
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(mutex);
        errors.push_back("image '" + img.id + "': " + e.what());
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& t : pool) t.join();
  }

  InspectTotals totals;
  std::ostringstream predictions;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (!reports[k]) continue;
    const InspectionReport& r = *reports[k];
    predictions << json{{"image_id", r.image_id}, {"mask", file_stem(r.image_id) + "_fused.png"}}
                       .dump()
                << '\n';
    if (r.scale) ++totals.with_scale;
    for (const BeetReport& b : r.beets) {
      ++totals.beets;
      for (int c = 0; c < kNumClasses; ++c) {
        totals.areas_px[c] += b.areas_px[c];
        if (b.areas_mm2) totals.areas_mm2[c] += (*b.areas_mm2)[c];
      }
      if (b.mass_g) {
        totals.mass_g += *b.mass_g;
        ++totals.with_mass;
      }
    }
  }
  write_text_file(out / "predictions_seg.jsonl", predictions.str());
  json summary = {{"images", selected.size()},
                  {"images_failed", errors.size()},
                  {"images_with_scale", totals.with_scale},
                  {"beets", totals.beets},
                  {"areas_px", areas_json(totals.areas_px)},
                  {"areas_mm2", areas_json(totals.areas_mm2)},
                  {"beets_with_mass", totals.with_mass},
                  {"mass_g", totals.mass_g},
                  {"tier", std::string(to_string(config.tier))},
                  {"margin_frac", config.margin_frac},
                  {"warnings", console.warnings}};
  write_json(out / "summary.json", summary);
  console.out << "images " << selected.size() - errors.size() << "/" << selected.size()
              << "  beets " << totals.beets << "  with scale " << totals.with_scale << '\n';

  if (!errors.empty()) {
    for (const std::string& e : errors) console.err << "error: " << e << '\n';
    throw Error(std::to_string(errors.size()) + " image(s) failed");
  }
}

}  // namespace beet::cli
