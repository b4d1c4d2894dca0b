#include "beet/error.hpp"
#include "beet/metrics.hpp"
#include "beet/reference.hpp"
#include "doctest.h"
#include "scenes.hpp"

using namespace beet;

namespace {

SemanticMask from_rows(std::vector<std::vector<int>> rows) {
  SemanticMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) m.set(x, y, class_from_index(rows[y][x]));
  }
  return m;
}

}  // namespace

TEST_CASE("confusion matches the naive count with and without roi") {
  testing::Rng rng(1);
  for (int t = 0; t < 40; ++t) {
    const int w = testing::uniform_int(rng, 1, 70);
    const int h = testing::uniform_int(rng, 1, 50);
    const SemanticMask p = testing::random_mask(rng, w, h);
    const SemanticMask g = testing::random_mask(rng, w, h);
    CHECK(confusion(p, g) == reference::confusion(p, g));
    BinaryMask roi(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) roi.set(x, y, testing::uniform_int(rng, 0, 2) == 0);
    }
    const ConfusionTotals c = confusion(p, g, &roi);
    CHECK(c == reference::confusion(p, g, &roi));
    CHECK(c.pixels == roi.count());
  }
}

TEST_CASE("confusion rejects mismatched sizes") {
  CHECK_THROWS_AS(confusion(SemanticMask(3, 3), SemanticMask(3, 4)), ValidationError);
}

TEST_CASE("hand-computed mIoU") {
  // gt: Bg Bg / Beet Beet ; pred: Bg Beet / Beet Beet
  const SemanticMask g = from_rows({{0, 0}, {1, 1}});
  const SemanticMask p = from_rows({{0, 1}, {1, 1}});
  const MiouResult r = miou(confusion(p, g));
  CHECK(*r.per_class[0] == doctest::Approx(0.5));
  CHECK(*r.per_class[1] == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(r.per_class[2].has_value());
  CHECK(r.mean == doctest::Approx(7.0 / 12.0));
}

TEST_CASE("perfect prediction scores 1") {
  testing::Rng rng(2);
  const SemanticMask g = testing::random_mask(rng, 30, 20);
  CHECK(miou(confusion(g, g)).mean == 1.0);
}

TEST_CASE("mIoU equals the direct per-class computation") {
  testing::Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const SemanticMask p = testing::random_mask(rng, 64, 64, testing::uniform_int(rng, 2, 7));
    const SemanticMask g = testing::random_mask(rng, 64, 64, testing::uniform_int(rng, 2, 7));
    CHECK(std::abs(miou(confusion(p, g)).mean - reference::miou_direct(p, g)) <= 1e-12);
  }
}

TEST_CASE("aggregate and per-sample modes") {
  const SemanticMask g1 = from_rows({{1, 1}});
  const SemanticMask p1 = from_rows({{1, 1}});
  const SemanticMask g2 = from_rows({{1, 0, 0, 0}});
  const SemanticMask p2 = from_rows({{0, 0, 0, 0}});
  const std::vector<ConfusionTotals> s = {confusion(p1, g1), confusion(p2, g2)};
  const MiouResult per = miou(s, MiouMode::PerSample);
  // sample 1: Beet 1 ; sample 2: Bg 3/4, Beet 0
  CHECK(per.mean == doctest::Approx((1.0 + 0.375) / 2.0));
  CHECK(*per.per_class[1] == doctest::Approx(0.5));
  CHECK(*per.per_class[0] == doctest::Approx(0.75));
  const MiouResult agg = miou(s, MiouMode::Aggregate);
  CHECK(*agg.per_class[1] == doctest::Approx(2.0 / 3.0));
  CHECK(agg.mean == doctest::Approx((0.75 + 2.0 / 3.0) / 2.0));
}

TEST_CASE("no evaluable classes throws") {
  CHECK_THROWS_AS(miou(ConfusionTotals{}), ValidationError);
  CHECK_THROWS_AS(miou(std::vector<ConfusionTotals>{}, MiouMode::Aggregate), ValidationError);
}

TEST_CASE("dice loss bounds") {
  testing::Rng rng(5);
  const SemanticMask g = testing::random_mask(rng, 40, 30);
  CHECK(dice_loss(ProbabilityRaster::one_hot(g), g) <= 1e-6);

  ProbabilityRaster uniform(40, 30);
  for (double& v : uniform.data) v = 1.0 / kNumClasses;
  const double u = dice_loss(uniform, g);
  CHECK(u > 0.0);
  CHECK(u <= 1.0);
  CHECK(std::abs(u - reference::dice_loss(uniform, g, kDefaultDiceEpsilon)) <= 1e-12);
}

TEST_CASE("dice loss of an even two-class split") {
  const SemanticMask g = from_rows({{0, 1}});
  ProbabilityRaster p(2, 1);
  for (std::size_t i = 0; i < 2; ++i) {
    p.at(0, i) = 0.5;
    p.at(1, i) = 0.5;
  }
  // each class: 1 - (2*0.5 + eps) / (1 + 1 + eps) = 0.5
  CHECK(dice_loss(p, g) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("dice loss matches the direct sums on random probabilities") {
  testing::Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const SemanticMask g = testing::random_mask(rng, 17, 13);
    ProbabilityRaster p(17, 13);
    for (std::size_t i = 0; i < p.plane(); ++i) {
      double sum = 0.0;
      for (int c = 0; c < kNumClasses; ++c) sum += p.at(c, i) = testing::uniform(rng, 0.0, 1.0);
      for (int c = 0; c < kNumClasses; ++c) p.at(c, i) /= sum;
    }
    CHECK(std::abs(dice_loss(p, g) - reference::dice_loss(p, g, 1e-6)) <= 1e-12);
  }
}

TEST_CASE("dice loss input checks") {
  const SemanticMask g(2, 2);
  ProbabilityRaster p = ProbabilityRaster::one_hot(g);
  CHECK_THROWS_AS(dice_loss(p, g, 0.0), ValidationError);
  CHECK_THROWS_AS(dice_loss(p, SemanticMask(2, 3)), ValidationError);
  p.at(0, 0) = 0.5;
  CHECK_THROWS_AS(dice_loss(p, g), ValidationError);
  p.at(1, 0) = 0.5;
  CHECK_NOTHROW(dice_loss(p, g));
  p.at(1, 0) = 1.5;
  p.at(0, 0) = -0.5;
  CHECK_THROWS_AS(dice_loss(p, g), ValidationError);
}

TEST_CASE("meta breakdown averages per value") {
  std::vector<SampleScore> s(3);
  s[0].miou = 0.2;
  s[0].meta.lighting = Lighting::Sunny;
  s[1].miou = 0.4;
  s[1].meta.lighting = Lighting::Sunny;
  s[1].meta.moisture = Moisture::Wet;
  s[2].miou = 0.9;
  s[2].meta.lighting = Lighting::Artificial;
  s[2].meta.stage = Stage::Storage;
  const MetaBreakdown b = meta_breakdown(s);
  CHECK(b.lighting[0].count == 2);
  CHECK(b.lighting[0].mean == doctest::Approx(0.3));
  CHECK(b.lighting[1].count == 0);
  CHECK(b.lighting[1].mean == 0.0);
  CHECK(b.moisture[1].mean == doctest::Approx(0.4));
  CHECK(b.stage[0].count == 2);
  CHECK(b.stage[2].mean == doctest::Approx(0.9));
  CHECK(b.overall.mean == doctest::Approx(0.5));
  const std::string csv = meta_breakdown_csv(b);
  CHECK(csv.rfind("category,value,count,mean_miou\n", 0) == 0);
  CHECK(csv.find("lighting,Diffuse,0,\n") != std::string::npos);
}

TEST_CASE("iou table leaves excluded classes empty") {
  const SemanticMask g = from_rows({{0, 1}});
  const std::string csv = iou_table_csv(miou(confusion(g, g)));
  CHECK(csv.rfind("Bg,Beet,Cut,Leaf,Soil,Dmg,Rot,Mean\n", 0) == 0);
  CHECK(csv.find(",,,,,") != std::string::npos);
}
