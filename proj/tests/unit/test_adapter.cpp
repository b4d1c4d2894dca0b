#include <filesystem>
#include <fstream>
#include <string>

#include "beet/adapter.hpp"
#include "beet/annotations.hpp"
#include "beet/error.hpp"
#include "beet/png_io.hpp"
#include "doctest.h"

using namespace beet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("beet_adapter_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static inline int counter = 0;
};

std::string fake(const std::string& args) { return std::string(BEET_FAKE_ADAPTER) + " " + args; }

AdapterConfig config(const std::string& args, const fs::path& scratch,
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(10'000)) {
  return {fake(args), timeout, scratch};
}

ImageRef gray_image(const RgbImage& raster) { return {"img", "", raster.width, raster.height, &raster}; }

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const BackendError& e) {
    CHECK(e.stage() == "adapter");
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("protocol round-trip through files") {
  TempDir dir;
  const ImageRef ref{"x", "", 6, 4, nullptr};
  InstanceDetection d{BinaryMask(6, 4), {0, 0, 2, 2}, 0.25};
  d.mask.set(0, 0, true);
  d.mask.set(1, 1, true);
  const auto got = protocol::decode_instances(protocol::encode_instances({d}, dir.path, "t"), ref, dir.path);
  REQUIRE(got.size() == 1);
  CHECK(got[0].mask == d.mask);
  CHECK(got[0].box == d.box);
  CHECK(got[0].score == 0.25);

  SemanticMask m(512, 288, SemanticClass::Soil);
  m.set(3, 4, SemanticClass::Rot);
  CHECK(protocol::decode_segment(protocol::encode_segment(m, dir.path, "s"), {512, 288}, dir.path) == m);

  const std::vector<MarkerDetection> mk = {{OrientedBox({5, 6}, 4, 2, 0.5), MarkerClass::Sign, 0.7}};
  const auto back = protocol::decode_markers(protocol::encode_markers(mk));
  REQUIRE(back.size() == 1);
  CHECK(back[0].cls == MarkerClass::Sign);
  CHECK(back[0].box.angle() == doctest::Approx(0.5));
}

TEST_CASE("protocol violations are reported with an excerpt") {
  const std::string e1 = error_of([] { protocol::decode_markers("{\"ok\":true}"); });
  CHECK(contains(e1, "protocol violation"));
  CHECK(contains(e1, "{\"ok\":true}"));
  const std::string e2 = error_of([] { protocol::decode_markers("not json"); });
  CHECK(contains(e2, "protocol violation"));
  const std::string e3 = error_of([] { protocol::decode_markers(protocol::encode_error("boom")); });
  CHECK(contains(e3, "reported an error: boom"));
  const std::string long_line(1000, 'x');
  CHECK(error_of([&] { protocol::decode_markers(long_line); }).size() < 400);
}

TEST_CASE("fixed adapter serves all three calls") {
  TempDir dir;
  const RgbImage raster(8, 6, 50);
  ExternalAdapter a(config("fixed 8 6 " + dir.path.string(), dir.path));
  const ImageRef ref = gray_image(raster);
  const auto dets = a.detect_instances(ref);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].mask.count() == 6);
  CHECK(dets[0].score == doctest::Approx(0.9));

  const RgbImage patch(512, 288, kLetterboxGray);
  const PatchTransform t = make_patch_transform(dets[0].box, 8, 6, {512, 288}, 0.0);
  const SemanticMask m = a.segment({&ref, &patch, t});
  CHECK(m.width() == 512);
  CHECK(m.at(100, 100) == SemanticClass::Beet);

  const auto markers = a.detect_markers(ref);
  REQUIRE(markers.size() == 1);
  CHECK(markers[0].box.width() == doctest::Approx(8.0));
  // the process is reused
  CHECK(a.detect_instances(ref).size() == 1);
}

TEST_CASE("private scratch directory is removed") {
  fs::path scratch;
  {
    ExternalAdapter a({fake("exit 0"), std::chrono::milliseconds(5000), {}});
    scratch = a.scratch_dir();
    CHECK(fs::is_directory(scratch));
  }
  CHECK_FALSE(fs::exists(scratch));
}

TEST_CASE("misbehaving adapters") {
  TempDir dir;
  const RgbImage raster(8, 6, 50);
  const ImageRef ref = gray_image(raster);
  const RgbImage patch(512, 288);
  const PatchTransform t = make_patch_transform({1, 1, 4, 3}, 8, 6, {512, 288}, 0.0);

  SUBCASE("wrong mask size") {
    ExternalAdapter a(config("wrong-size 8 6 " + dir.path.string(), dir.path));
    CHECK(contains(error_of([&] { a.detect_instances(ref); }), "protocol violation"));
    CHECK(contains(error_of([&] { a.segment({&ref, &patch, t}); }), "protocol violation"));
  }
  SUBCASE("score out of range") {
    ExternalAdapter a(config("bad-score 8 6 " + dir.path.string(), dir.path));
    CHECK(contains(error_of([&] { a.detect_instances(ref); }), "score"));
  }
  SUBCASE("garbage") {
    ExternalAdapter a(config("garbage", dir.path));
    CHECK(contains(error_of([&] { a.detect_markers(ref); }), "protocol violation"));
  }
  SUBCASE("error reply") {
    ExternalAdapter a(config("error", dir.path));
    CHECK(contains(error_of([&] { a.detect_markers(ref); }), "model not loaded"));
  }
  SUBCASE("timeout") {
    ExternalAdapter a(config("silent", dir.path, std::chrono::milliseconds(300)));
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(contains(error_of([&] { a.detect_markers(ref); }), "no response within 300 ms"));
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
  }
  SUBCASE("early exit") {
    ExternalAdapter a(config("exit 3", dir.path));
    CHECK(contains(error_of([&] { a.detect_markers(ref); }), "exited with status 3"));
    // restarted lazily, fails the same way
    CHECK(contains(error_of([&] { a.detect_markers(ref); }), "exited with status 3"));
  }
  SUBCASE("missing command") {
    ExternalAdapter a({"/nonexistent/adapter", std::chrono::milliseconds(5000), dir.path});
    CHECK_FALSE(error_of([&] { a.detect_markers(ref); }).empty());
  }
}

TEST_CASE("oracle over the adapter matches the in-process oracle") {
  TempDir dir;
  const fs::path annotations = fs::path(BEET_DATA_DIR) / "fixture/annotations.json";
  auto images = load_annotations(annotations).images;
  OracleBackend direct(images);
  ExternalAdapter a(config("oracle " + annotations.string() + " " + dir.path.string(), dir.path));
  for (const AnnotatedImage& img : images) {
    const RgbImage raster(img.width, img.height, 90);
    const fs::path file = dir.path / fs::path(img.path).filename();
    write_rgb_png(file, raster);
    const ImageRef ref{img.id, file, img.width, img.height, &raster};

    const auto want = direct.detect_instances(ref);
    const auto got = a.detect_instances(ref);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].mask == want[i].mask);
      CHECK(got[i].box == want[i].box);
    }
    for (const auto& d : want) {
      const Patch p = extract_patch(raster, d.box, {1056, 576}, 0.05);
      CHECK(a.segment({&ref, &p.raster, p.transform}) ==
            direct.segment({&ref, &p.raster, p.transform}));
    }
    CHECK(a.detect_markers(ref).size() == img.markers.size());
  }
}
