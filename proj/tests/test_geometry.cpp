#include <doctest.h>

#include <cmath>

#include "rsalab/geometry.hpp"

using namespace rsalab;

TEST_CASE("box basics: half-open membership and volume") {
  const Box b{Vec{0.0, 0.0}, Vec{2.0, 3.0}};
  CHECK(b.volume() == 6.0);
  CHECK(b.contains({0.0, 0.0}));
  CHECK(b.contains({1.999, 2.999}));
  CHECK(!b.contains({2.0, 1.0}));
  CHECK(!b.contains({1.0, 3.0}));
}

TEST_CASE("region volume via inclusion-exclusion") {
  // two overlapping unit squares sharing a 0.5 x 1 strip
  const Region r(std::vector<Box>{Box{Vec{0.0, 0.0}, Vec{1.0, 1.0}},
                                  Box{Vec{0.5, 0.0}, Vec{1.5, 1.0}}});
  CHECK(r.volume() == doctest::Approx(1.5).epsilon(1e-12));
  // triple overlap
  const Region r3(std::vector<Box>{Box{Vec{0.0}, Vec{2.0}}, Box{Vec{1.0}, Vec{3.0}},
                                   Box{Vec{2.5}, Vec{4.0}}});
  CHECK(r3.volume() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(Region().volume() == 0.0);
  CHECK_THROWS_AS(Region(Vec{0.0}, Vec{0.0}), std::invalid_argument);
}

TEST_CASE("region scaling, erosion, padding") {
  const Region r(Vec{-1.0, -1.0}, Vec{1.0, 1.0});
  CHECK(r.scaled(3.0).volume() == doctest::Approx(36.0));
  CHECK(r.eroded(0.5).volume() == doctest::Approx(1.0));
  CHECK(r.eroded(1.0).empty());
  CHECK(r.padded(1.0).volume() == doctest::Approx(16.0));
  CHECK(r.interior_clearance({0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(r.interior_clearance({0.9, 0.0}) == doctest::Approx(0.1));
  CHECK(r.interior_clearance({5.0, 0.0}) == 0.0);
}

TEST_CASE("region intersection volume") {
  const Region a(Vec{0.0}, Vec{2.0});
  const Region b(Vec{1.0}, Vec{5.0});
  CHECK(region_intersection_volume(a, b) == doctest::Approx(1.0));
  CHECK(region_intersection_volume(a, Region(Vec{3.0}, Vec{4.0})) == 0.0);
  // overlapping pieces are not double counted
  const Region c(std::vector<Box>{Box{Vec{0.0}, Vec{2.0}}, Box{Vec{0.5}, Vec{2.5}}});
  CHECK(region_intersection_volume(c, c) == doctest::Approx(2.5));
}

TEST_CASE("cell enumeration covers the region") {
  const Region r(Vec{-1.2, 0.3}, Vec{3.4, 2.0});
  const auto cells = cells_overlapping(r, 2.0);
  for (const auto& c : cells) {
    const Box cb = cell_box(c, 2.0);
    bool touches = false;
    for (const auto& rb : r.boxes())
      touches = touches || box_intersection(cb, rb).has_value();
    CHECK(touches);
  }
  // every corner-ish sample point of the region lies in an enumerated cell
  for (double x = -1.2; x < 3.4; x += 0.37) {
    for (double y = 0.3; y < 2.0; y += 0.23) {
      const CellIndex c = cell_of({x, y}, 2.0);
      CHECK(std::find(cells.begin(), cells.end(), c) != cells.end());
    }
  }
}

TEST_CASE("sites_in_region enumerates integer points, half open") {
  const Region r(Vec{-1.0, 0.0}, Vec{2.0, 1.0});
  const auto sites = sites_in_region(r);
  // x in {-1, 0, 1}, y in {0} (upper faces excluded)
  CHECK(sites.size() == 3);
  for (const auto& s : sites) {
    CHECK(s[1] == 0);
    CHECK(s[0] >= -1);
    CHECK(s[0] <= 1);
  }
}

TEST_CASE("distance helpers") {
  CHECK(distance({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(5.0));
  const Vec one{0.0}, two{0.0, 1.0};
  CHECK_THROWS_AS(squared_distance(one, two), std::invalid_argument);
  CHECK(lex_less({0.0, 1.0}, {0.0, 2.0}));
  CHECK(!lex_less({1.0, 0.0}, {0.0, 5.0}));
}
