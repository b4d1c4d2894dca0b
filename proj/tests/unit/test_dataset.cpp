#include <filesystem>
#include <map>
#include <set>

#include "beet/annotations.hpp"
#include "beet/dataset.hpp"
#include "beet/error.hpp"
#include "beet/raster.hpp"
#include "doctest.h"
#include "scenes.hpp"

using namespace beet;

namespace {

std::vector<AnnotatedImage> singletons(int n) {
  std::vector<AnnotatedImage> v;
  for (int i = 0; i < n; ++i) {
    AnnotatedImage img;
    img.id = "i" + std::to_string(i);
    img.width = img.height = 4;
    img.group_id = "g" + std::to_string(i);
    v.push_back(img);
  }
  return v;
}

// Checks partition and group constraints; returns a description of the
// first problem or an empty string.
std::string split_problem(const std::vector<AnnotatedImage>& images, const DatasetSplit& s) {
  std::map<std::string, int> where;
  const std::vector<std::string>* parts[] = {&s.train, &s.val, &s.test};
  for (int p = 0; p < 3; ++p) {
    for (const auto& id : *parts[p]) {
      if (where.count(id)) return "duplicate " + id;
      where[id] = p;
    }
  }
  if (where.size() != images.size()) return "not a partition";
  std::map<std::string, int> group_part;
  for (const auto& img : images) {
    auto [it, fresh] = group_part.emplace(img.group_id, where[img.id]);
    if (!fresh && it->second != where[img.id]) return "group " + img.group_id + " split";
  }
  return {};
}

}  // namespace

TEST_CASE("ten singletons split 8/1/1") {
  const auto images = singletons(10);
  const DatasetSplit s = make_split(images, {}, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 1);
}

TEST_CASE("split is deterministic and respects groups") {
  testing::Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto images = testing::random_grouped_dataset(rng, 80);
    const auto seed = static_cast<std::uint64_t>(t);
    const DatasetSplit a = make_split(images, {}, seed);
    CHECK(split_problem(images, a).empty());
    CHECK(serialize_split(a) == serialize_split(make_split(images, {}, seed)));
  }
}

TEST_CASE("split does not depend on image order") {
  testing::Rng rng(6);
  auto images = testing::random_grouped_dataset(rng, 60);
  const DatasetSplit a = make_split(images, {}, 9);
  std::shuffle(images.begin(), images.end(), rng);
  const DatasetSplit b = make_split(images, {}, 9);
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(a.train) == sorted(b.train));
  CHECK(sorted(a.val) == sorted(b.val));
}

TEST_CASE("split errors") {
  auto images = singletons(5);
  CHECK_THROWS_AS(make_split(images, {0.5, 0.5, 0.5}, 0), ValidationError);
  images[0].group_id.clear();
  CHECK_THROWS_AS(make_split(images, {}, 0), ValidationError);

  auto big = singletons(4);
  for (auto& img : big) img.group_id = "same";
  CHECK_THROWS_AS(make_split(big, {0.5, 0.25, 0.25}, 0), ValidationError);
}

TEST_CASE("split file round-trip") {
  DatasetSplit s{{"a", "b"}, {"c"}, {}};
  CHECK(parse_split(serialize_split(s)) == s);
  CHECK_THROWS_AS(parse_split(R"({"train":["a"],"val":["a"],"test":[]})"), ValidationError);
  CHECK_THROWS_AS(parse_split("[1,2"), ParseError);
}

TEST_CASE("stats of the bundled fixture match the hand count") {
  const auto images =
      load_annotations(std::filesystem::path(BEET_DATA_DIR) / "fixture/annotations.json").images;
  const StageStatsTable t = dataset_stats(images);
  const auto& sample = t.stages[0];
  CHECK(sample.images == 2);
  CHECK(sample.beets == 3);
  CHECK(sample.locations == 1);
  CHECK(sample.sessions == 2);
  CHECK(sample.beets_per_image == doctest::Approx(1.5));
  CHECK(t.stages[1].beets == 5);
  CHECK(t.stages[1].locations == 2);
  CHECK(t.stages[2].sessions == 1);
  CHECK(t.total.images == 6);
  CHECK(t.total.beets == 11);
  CHECK(t.total.locations == 4);
  CHECK(t.total.sessions == 5);
  CHECK(t.stages[1].beet_ratio_percent == doctest::Approx(500.0 / 11.0));
}

TEST_CASE("empty dataset gives a zero table") {
  const StageStatsTable t = dataset_stats({});
  CHECK(t.total.images == 0);
  CHECK(t.total.beets_per_image == 0.0);
  CHECK(stats_from_json(stats_to_json(t)) == t);
}

TEST_CASE("stats JSON round-trip is exact") {
  const auto images = testing::dataset_from_sessions(testing::published_sessions());
  const StageStatsTable t = dataset_stats(images);
  CHECK(stats_from_json(stats_to_json(t)) == t);
}

TEST_CASE("label distribution counts every pixel once") {
  const auto images =
      load_annotations(std::filesystem::path(BEET_DATA_DIR) / "fixture/annotations.json").images;
  const LabelDistribution d = label_pixel_distribution(images, rasterized_annotations());
  std::uint64_t total = 0;
  for (const auto& stage : d.per_stage) {
    for (auto c : stage) total += c;
  }
  CHECK(total == 6u * 160u * 120u);
  REQUIRE(d.per_image.size() == 6);
  // s2: Beet 60x50 with a 20x10 Cut.
  CHECK(d.per_image[1].counts[index_of(SemanticClass::Cut)] == 200);
  CHECK(d.per_image[1].counts[index_of(SemanticClass::Beet)] == 3000 - 200);

  const MaskSource none = [](const AnnotatedImage&) { return std::optional<SemanticMask>{}; };
  CHECK_THROWS_AS(label_pixel_distribution(images, none), ValidationError);
}
