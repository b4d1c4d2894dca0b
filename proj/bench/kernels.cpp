// Parallel kernels against their serial references.
//   ./beet_bench --benchmark_filter=Rasterize

#include <benchmark/benchmark.h>

#include "beet/metrics.hpp"
#include "beet/patch.hpp"
#include "beet/raster.hpp"
#include "beet/reference.hpp"
#include "scenes.hpp"

using namespace beet;

namespace {

std::vector<AnnotatedRegion> scene(int w, int h) {
  testing::Rng rng(5);
  std::vector<AnnotatedRegion> regions;
  for (int k = 0; k < 24; ++k) {
    const Point c{testing::uniform(rng, 0, w), testing::uniform(rng, 0, h)};
    const double r = testing::uniform(rng, 0.05, 0.2) * h;
    regions.push_back({class_from_index(testing::uniform_int(rng, 1, 6)),
                       Polygon(testing::random_star(rng, c, 0.6 * r, r, 40)), k});
  }
  return regions;
}

void BM_Rasterize(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = w * 9 / 16;
  const auto regions = scene(w, h);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(regions, w, h));
  state.SetItemsProcessed(state.iterations() * w * h);
}

void BM_RasterizeReference(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = w * 9 / 16;
  const auto regions = scene(w, h);
  for (auto _ : state) benchmark::DoNotOptimize(reference::rasterize(regions, w, h));
  state.SetItemsProcessed(state.iterations() * w * h);
}

void BM_Confusion(benchmark::State& state) {
  testing::Rng rng(1);
  const int w = static_cast<int>(state.range(0));
  const SemanticMask p = testing::random_mask(rng, w, w);
  const SemanticMask g = testing::random_mask(rng, w, w);
  for (auto _ : state) benchmark::DoNotOptimize(confusion(p, g));
  state.SetItemsProcessed(state.iterations() * w * w);
}

void BM_ConfusionReference(benchmark::State& state) {
  testing::Rng rng(1);
  const int w = static_cast<int>(state.range(0));
  const SemanticMask p = testing::random_mask(rng, w, w);
  const SemanticMask g = testing::random_mask(rng, w, w);
  for (auto _ : state) benchmark::DoNotOptimize(reference::confusion(p, g));
  state.SetItemsProcessed(state.iterations() * w * w);
}

void BM_Fuse(benchmark::State& state) {
  const int w = 1920;
  const int h = 1080;
  testing::Rng rng(2);
  const PatchSize target = patch_size(PatchTier::Large);
  std::vector<SemanticMask> patches;
  std::vector<BinaryMask> masks;
  std::vector<PatchTransform> transforms;
  for (int k = 0; k < 8; ++k) {
    const AxisAlignedBox box = testing::random_box(rng, 1080);
    masks.push_back(rasterize_polygon(testing::rect_ring(box.x_min, box.y_min, box.x_max, box.y_max), w, h));
    transforms.push_back(make_patch_transform(box, w, h, target, 0.05));
    patches.push_back(testing::random_mask(rng, target.width, target.height));
  }
  std::vector<FuseInput> in;
  for (int k = 0; k < 8; ++k) in.push_back({&patches[k], transforms[k], &masks[k], 0.1 * k});
  for (auto _ : state) benchmark::DoNotOptimize(fuse(in, w, h));
}

}  // namespace

BENCHMARK(BM_Rasterize)->Arg(640)->Arg(1920);
BENCHMARK(BM_RasterizeReference)->Arg(640)->Arg(1920);
BENCHMARK(BM_Confusion)->Arg(512)->Arg(2048);
BENCHMARK(BM_ConfusionReference)->Arg(512)->Arg(2048);
BENCHMARK(BM_Fuse);

BENCHMARK_MAIN();
