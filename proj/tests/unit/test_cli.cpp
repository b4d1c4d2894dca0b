#include <filesystem>
#include <fstream>
#include <sstream>

#include "beet/annotations.hpp"
#include "beet/dataset.hpp"
#include "beet/error.hpp"
#include "beet/png_io.hpp"
#include "beet/raster.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace beet;
using namespace beet::cli;
using nlohmann::json;

namespace {

struct Workspace {
  fs::path root;
  fs::path dataset;
  std::ostringstream out;
  std::ostringstream err;
  Console console{out, err};

  Workspace() {
    static int counter = 0;
    root = fs::temp_directory_path() /
           ("beet_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(root);
    dataset = root / "annotations.json";
    fs::copy_file(fs::path(BEET_DATA_DIR) / "fixture/annotations.json", dataset);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  CommonOptions common(const std::string& out_name) const {
    CommonOptions c;
    c.out = root / out_name;
    return c;
  }
  std::vector<AnnotatedImage> images() const { return load_annotations(dataset).images; }
  void write_images() const {
    for (const auto& img : images()) {
      fs::create_directories((root / img.path).parent_path());
      write_rgb_png(root / img.path, RgbImage(img.width, img.height, 100));
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("stats writes the table and label distribution") {
  Workspace ws;
  cmd_stats(ws.dataset, true, ws.common("stats"), ws.console);
  CHECK(ws.out.str().find("Harvest") != std::string::npos);
  const StageStatsTable t = stats_from_json(slurp(ws.root / "stats/stats.json"));
  CHECK(t == dataset_stats(ws.images()));
  CHECK(t.total.beets == 11);
  CHECK(fs::exists(ws.root / "stats/stats.csv"));
  CHECK(fs::exists(ws.root / "stats/label_distribution_stage.csv"));
  CHECK(fs::exists(ws.root / "stats/label_distribution_images.csv"));
}

TEST_CASE("split is reproducible through the command") {
  Workspace ws;
  SplitOptions opt;
  cmd_split(ws.dataset, opt, ws.common("a.json"), ws.console);
  cmd_split(ws.dataset, opt, ws.common("b.json"), ws.console);
  CHECK(slurp(ws.root / "a.json") == slurp(ws.root / "b.json"));
  const DatasetSplit s = parse_split(slurp(ws.root / "a.json"));
  CHECK(s.train.size() + s.val.size() + s.test.size() == 6);

  opt.train = 0.9;
  CHECK_THROWS_AS(cmd_split(ws.dataset, opt, ws.common("c.json"), ws.console), ValidationError);
  CHECK_THROWS_AS(cmd_split(ws.dataset, {}, CommonOptions{}, ws.console), ValidationError);
}

TEST_CASE("convert writes an instance dataset") {
  Workspace ws;
  const fs::path report = ws.root / "report.json";
  cmd_convert(ws.dataset, report, ws.common("instances.json"), ws.console);
  const auto out = load_annotations(ws.root / "instances.json").images;
  REQUIRE(out.size() == 6);
  std::size_t regions = 0;
  for (const auto& img : out) {
    for (const auto& r : img.regions) CHECK(r.cls == SemanticClass::Beet);
    regions += img.regions.size();
  }
  CHECK(regions == 11);
  CHECK(read_json(report).at("instances") == 11);
}

TEST_CASE("evaluating the ground truth itself scores 1") {
  Workspace ws;
  std::ofstream preds(ws.root / "preds.jsonl");
  for (const auto& img : ws.images()) {
    write_semantic_png(ws.root / (img.id + ".png"), rasterize(img.regions, img.width, img.height));
    preds << json{{"image_id", img.id}, {"mask", img.id + ".png"}}.dump() << '\n';
  }
  preds.close();
  EvaluateOptions opt{ws.root / "preds.jsonl", ws.dataset, EvalTask::Seg, false};
  cmd_evaluate(opt, ws.common("eval"), ws.console);
  const json j = read_json(ws.root / "eval/evaluation.json");
  CHECK(j.at("miou").get<double>() == 1.0);
  CHECK(j.at("dice_loss").get<double>() <= 1e-6);
  CHECK(fs::exists(ws.root / "eval/iou_table.csv"));
  CHECK(fs::exists(ws.root / "eval/meta_breakdown.csv"));
}

TEST_CASE("evaluate rejects bad prediction files") {
  Workspace ws;
  const fs::path p = ws.root / "p.jsonl";
  EvaluateOptions opt{p, ws.dataset, EvalTask::Seg, false};
  std::ofstream(p) << "{\"image_id\":\"nope\",\"mask\":\"x.png\"}\n";
  CHECK_THROWS_AS(cmd_evaluate(opt, ws.common("e"), ws.console), ValidationError);
  std::ofstream(p) << "{oops\n";
  CHECK_THROWS_AS(cmd_evaluate(opt, ws.common("e"), ws.console), ParseError);
  CHECK(parse_eval_task("obb") == EvalTask::Obb);
  CHECK_THROWS_AS(parse_eval_task("pose"), ValidationError);
}

TEST_CASE("box predictions equal to the instances score 1") {
  Workspace ws;
  OracleBackend oracle(ws.images());
  std::ofstream preds(ws.root / "det.jsonl");
  for (const auto& img : ws.images()) {
    for (const auto& d : oracle.detect_instances({img.id, "", img.width, img.height, nullptr})) {
      preds << json{{"image_id", img.id},
                    {"class", "Beet"},
                    {"box", {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max}},
                    {"score", 0.8}}
                   .dump()
            << '\n';
    }
  }
  preds.close();
  cmd_evaluate({ws.root / "det.jsonl", ws.dataset, EvalTask::Det, false}, ws.common("det"),
               ws.console);
  CHECK(read_json(ws.root / "det/evaluation.json").at("map50_95").get<double>() == 1.0);
  CHECK(fs::exists(ws.root / "det/ap_table.csv"));
}

TEST_CASE("calibrate-mass writes a model") {
  Workspace ws;
  std::ofstream(ws.root / "samples.csv") << "area_mm2,mass_g\n30000,1500\n20000,1000\n";
  cmd_calibrate_mass(ws.root / "samples.csv", ws.common("model.json"), ws.console);
  CHECK(mass_model_from_json(slurp(ws.root / "model.json")).m_bar == doctest::Approx(0.05));
}

TEST_CASE("inspect with the oracle and no marker sizes") {
  Workspace ws;
  CommonOptions c = ws.common("inspect");
  c.oracle = true;
  c.workers = 2;
  cmd_inspect({ws.dataset, {}, std::nullopt}, c, ws.console);
  CHECK(ws.console.warnings == 6);  // no image files
  const json summary = read_json(ws.root / "inspect/summary.json");
  CHECK(summary.at("images") == 6);
  CHECK(summary.at("beets") == 11);
  CHECK(summary.at("images_with_scale") == 0);
  CHECK(summary.at("beets_with_mass") == 0);
  const InspectionReport r = report_from_json(slurp(ws.root / "inspect/s1.json"));
  CHECK(r.beets.size() == 2);
  CHECK_FALSE(r.scale);

  // the fused maps evaluate against the ground truth; only the Leaf outside
  // the h2 beet body is missing
  EvaluateOptions opt{ws.root / "inspect/predictions_seg.jsonl", ws.dataset, EvalTask::Seg, true};
  cmd_evaluate(opt, ws.common("eval"), ws.console);
  const json e = read_json(ws.root / "eval/evaluation.json");
  CHECK(e.at("miou").get<double>() > 0.9);
  CHECK(e.at("miou").get<double>() < 1.0);
}

TEST_CASE("inspect with marker sizes reports scale and mass") {
  Workspace ws;
  ws.write_images();
  std::ofstream(ws.root / "config.json")
      << R"({"markers": {"Ruler": {"length_mm": 500, "width_mm": 50}}})";
  std::ofstream(ws.root / "model.json") << R"({"m_bar": 0.05, "samples": 2})";
  CommonOptions c = ws.common("inspect");
  c.oracle = true;
  c.config = ws.root / "config.json";
  cmd_inspect({ws.dataset, {"s1"}, ws.root / "model.json"}, c, ws.console);
  CHECK(ws.console.warnings == 0);
  const InspectionReport r = report_from_json(slurp(ws.root / "inspect/s1.json"));
  REQUIRE(r.scale);
  CHECK(r.scale->mm_per_pixel == doctest::Approx(5.0));
  CHECK(*r.beets[0].mass_g == doctest::Approx(*r.beets[0].area_mm2 * 0.05));
}

TEST_CASE("inspect through an adapter matches the oracle") {
  Workspace ws;
  ws.write_images();
  CommonOptions o = ws.common("oracle");
  o.oracle = true;
  cmd_inspect({ws.dataset, {}, std::nullopt}, o, ws.console);

  fs::create_directories(ws.root / "scratch");
  CommonOptions a = ws.common("adapter");
  a.adapter = std::string(BEET_FAKE_ADAPTER) + " oracle " + ws.dataset.string() + " " +
              (ws.root / "scratch").string();
  a.workers = 2;
  cmd_inspect({ws.dataset, {}, std::nullopt}, a, ws.console);
  for (const auto& img : ws.images()) {
    CHECK(read_semantic_png(ws.root / "oracle" / (img.id + "_fused.png")) ==
          read_semantic_png(ws.root / "adapter" / (img.id + "_fused.png")));
  }
}

TEST_CASE("inspect argument errors") {
  Workspace ws;
  CommonOptions c = ws.common("x");
  CHECK_THROWS_AS(cmd_inspect({ws.dataset, {}, std::nullopt}, c, ws.console), ValidationError);
  c.oracle = true;
  c.adapter = "cat";
  CHECK_THROWS_AS(cmd_inspect({ws.dataset, {}, std::nullopt}, c, ws.console), ValidationError);
  c.adapter.reset();
  CHECK_THROWS_AS(cmd_inspect({ws.dataset, {"zzz"}, std::nullopt}, c, ws.console), ValidationError);
}

TEST_CASE("a failing adapter fails every image but writes the summary") {
  Workspace ws;
  CommonOptions c = ws.common("x");
  c.adapter = std::string(BEET_FAKE_ADAPTER) + " error";
  CHECK_THROWS_AS(cmd_inspect({ws.dataset, {}, std::nullopt}, c, ws.console), Error);
  CHECK(read_json(ws.root / "x/summary.json").at("images_failed") == 6);
  CHECK(ws.err.str().find("instances: adapter: reported an error: model not loaded") != std::string::npos);
}

TEST_CASE("file stems") {
  CHECK(file_stem("a/b c") == "a_b_c");
  CHECK(file_stem("..") == "_..");
  CHECK(file_stem("ok-1.x") == "ok-1.x");
}
