#include "beet/detection_eval.hpp"
#include "beet/error.hpp"
#include "beet/geometry.hpp"
#include "beet/reference.hpp"
#include "doctest.h"
#include "scenes.hpp"

using namespace beet;

namespace {

using Box = AxisAlignedBox;

double box_iou(const Box& a, const Box& b) { return aabb_iou(a, b); }

}  // namespace

TEST_CASE("perfect detections give AP 1") {
  const std::vector<GroundTruth<Box>> gts = {{{0, 0, 10, 10}, 0, 0}, {{20, 20, 30, 30}, 0, 1}};
  const std::vector<Detection<Box>> dets = {{{0, 0, 10, 10}, 0, 0.9, 0},
                                            {{20, 20, 30, 30}, 0, 0.8, 1}};
  CHECK(average_precision<Box>(dets, gts, 0.5, box_iou) == 1.0);
  CHECK(map_50_95<Box>(dets, gts, box_iou) == 1.0);
}

TEST_CASE("a false positive ranked first") {
  const std::vector<GroundTruth<Box>> gts = {{{0, 0, 10, 10}, 0, 0}};
  const std::vector<Detection<Box>> dets = {{{50, 50, 60, 60}, 0, 0.9, 0},
                                            {{0, 0, 10, 10}, 0, 0.5, 0}};
  // precision at recall 1 is 1/2 everywhere
  CHECK(average_precision<Box>(dets, gts, 0.5, box_iou) == doctest::Approx(0.5));
}

TEST_CASE("half the objects found with full precision") {
  const std::vector<GroundTruth<Box>> gts = {{{0, 0, 10, 10}, 0, 0}, {{20, 0, 30, 10}, 0, 0}};
  const std::vector<Detection<Box>> dets = {{{0, 0, 10, 10}, 0, 0.9, 0}};
  CHECK(average_precision<Box>(dets, gts, 0.5, box_iou) == doctest::Approx(51.0 / 101.0));
}

TEST_CASE("detections never match across images") {
  const std::vector<GroundTruth<Box>> gts = {{{0, 0, 10, 10}, 0, 0}};
  const std::vector<Detection<Box>> dets = {{{0, 0, 10, 10}, 0, 0.9, 1}};
  CHECK(average_precision<Box>(dets, gts, 0.5, box_iou) == 0.0);
}

TEST_CASE("empty ground truth convention") {
  const std::vector<GroundTruth<Box>> none;
  const std::vector<Detection<Box>> one = {{{0, 0, 1, 1}, 0, 0.3, 0}};
  CHECK(average_precision<Box>(std::vector<Detection<Box>>{}, none, 0.5, box_iou) == 1.0);
  CHECK(average_precision<Box>(one, none, 0.5, box_iou) == 0.0);
  CHECK(evaluate_map<Box>(std::vector<Detection<Box>>{}, none, box_iou).map == 1.0);
}

TEST_CASE("IoU threshold boundary is inclusive") {
  // IoU exactly 0.5: 10x10 vs 10x5 inside it
  const std::vector<GroundTruth<Box>> gts = {{{0, 0, 10, 10}, 0, 0}};
  const std::vector<Detection<Box>> dets = {{{0, 0, 10, 5}, 0, 0.9, 0}};
  CHECK(average_precision<Box>(dets, gts, 0.5, box_iou) == 1.0);
  CHECK(average_precision<Box>(dets, gts, 0.55, box_iou) == 0.0);
}

TEST_CASE("argument checks") {
  DetectionProblem p;
  p.num_gts = 1;
  p.scores = {1.5};
  p.candidates.resize(1);
  CHECK_THROWS_AS(average_precision(p, 0.5), ValidationError);
  p.scores = {0.5};
  CHECK_THROWS_AS(average_precision(p, 0.0), ValidationError);
  CHECK_THROWS_AS(average_precision(p, 1.01), ValidationError);
}

TEST_CASE("per-class mean over labels") {
  const std::vector<GroundTruth<Box>> gts = {{{0, 0, 10, 10}, 0, 0}, {{20, 0, 30, 10}, 1, 0}};
  // label 1 detection sits on the label 0 object: wrong class, no match
  const std::vector<Detection<Box>> dets = {{{0, 0, 10, 10}, 0, 0.9, 0},
                                            {{0, 0, 10, 10}, 1, 0.9, 0}};
  const MapResult r = evaluate_map<Box>(dets, gts, box_iou);
  REQUIRE(r.per_class.size() == 2);
  CHECK(r.per_class[0].map == 1.0);
  CHECK(r.per_class[1].map == 0.0);
  CHECK(r.map == doctest::Approx(0.5));
}

TEST_CASE("envelope AP equals AP recounted at every cutoff") {
  testing::Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    const auto scene = testing::random_detection_scene<Box>(
        rng, testing::uniform_int(rng, 1, 4), [](testing::Rng& r) { return testing::random_box(r, 100); },
        testing::perturb_box);
    const DetectionProblem problem = build_problem<Box>(scene.dets, scene.gts, box_iou);
    const reference::ApInput in = testing::ap_input(scene, box_iou);
    CHECK(std::abs(map_50_95(problem) - reference::map_50_95_by_cutoffs(in)) <= 1e-9);
    CHECK(std::abs(average_precision(problem, 0.5) - reference::ap_by_cutoffs(in, 0.5)) <= 1e-9);
  }
}

TEST_CASE("pr csv layout") {
  const std::vector<GroundTruth<Box>> gts = {{{0, 0, 10, 10}, 0, 0}};
  const std::vector<Detection<Box>> dets = {{{0, 0, 10, 10}, 0, 0.9, 0}};
  const std::string csv = pr_curve_csv(pr_curve(build_problem<Box>(dets, gts, box_iou), 0.5));
  CHECK(csv.rfind("kind,index,recall,precision\nranked,1,1,1\n", 0) == 0);
  CHECK(csv.find("interpolated,100,1,1\n") != std::string::npos);
}
