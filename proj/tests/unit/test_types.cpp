#include "beet/error.hpp"
#include "beet/types.hpp"
#include "doctest.h"

using namespace beet;

TEST_CASE("label names round-trip") {
  for (SemanticClass c : kAllClasses) CHECK(parse_semantic_class(to_string(c)) == c);
  for (Stage s : kAllStages) CHECK(parse_stage(to_string(s)) == s);
  for (Lighting l : kAllLightings) CHECK(parse_lighting(to_string(l)) == l);
  for (Moisture m : kAllMoistures) CHECK(parse_moisture(to_string(m)) == m);
  CHECK(parse_marker_class("Sign") == MarkerClass::Sign);
  CHECK_THROWS_AS(parse_semantic_class("Stone"), ValidationError);
  CHECK_THROWS_AS(parse_stage("sample"), ValidationError);
}

TEST_CASE("class order follows the results table") {
  const char* expected[] = {"Bg", "Beet", "Cut", "Leaf", "Soil", "Dmg", "Rot"};
  for (int i = 0; i < kNumClasses; ++i) CHECK(to_string(kAllClasses[i]) == expected[i]);
}

TEST_CASE("polygon invariants") {
  CHECK_NOTHROW(Polygon({{0, 0}, {4, 0}, {0, 3}}));
  CHECK_THROWS_AS(Polygon({{0, 0}, {4, 0}}), ValidationError);
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {2, 2}}), ValidationError);  // zero area
  CHECK_THROWS_AS(Polygon({{0, 0}, {0, 0}, {4, 0}, {0, 3}}), ValidationError);

  auto p = Polygon::sanitize({{0, 0}, {0, 0}, {4, 0}, {0, 3}, {0, 0}});
  REQUIRE(p);
  CHECK(p->size() == 3);
  CHECK_FALSE(Polygon::sanitize({{1, 1}, {1, 1}, {1, 1}}));
  CHECK_FALSE(Polygon::sanitize({{0, 0}, {5, 5}, {10, 10}}));
}

TEST_CASE("signed area sign follows winding") {
  const std::vector<Point> ccw = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  std::vector<Point> cw(ccw.rbegin(), ccw.rend());
  CHECK(signed_area2(ccw) == doctest::Approx(8.0));
  CHECK(signed_area2(cw) == doctest::Approx(-8.0));
}

TEST_CASE("markers must be convex and non-degenerate") {
  CHECK_NOTHROW(MarkerAnnotation(MarkerClass::Ruler, {{{0, 0}, {10, 0}, {10, 2}, {0, 2}}}));
  CHECK_NOTHROW(MarkerAnnotation(MarkerClass::Ruler, {{{0, 0}, {0, 2}, {10, 2}, {10, 0}}}));
  // bow-tie
  CHECK_THROWS_AS(MarkerAnnotation(MarkerClass::Sign, {{{0, 0}, {10, 2}, {10, 0}, {0, 2}}}),
                  ValidationError);
  // dart (non-convex)
  CHECK_THROWS_AS(MarkerAnnotation(MarkerClass::Sign, {{{0, 0}, {10, 0}, {3, 3}, {0, 10}}}),
                  ValidationError);
  // collinear
  CHECK_THROWS_AS(MarkerAnnotation(MarkerClass::Sign, {{{0, 0}, {1, 0}, {2, 0}, {3, 0}}}),
                  ValidationError);
}
