#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rsalab/packing.hpp"
#include "rsalab/rng.hpp"

using namespace rsalab;

namespace {

SpaceTimePoint pt(Vec x, double t) {
  SpaceTimePoint p;
  p.x = std::move(x);
  p.t = t;
  return p;
}

// Brute-force sequential rule, no spatial index.
std::vector<std::uint8_t> pack_reference(const std::vector<SpaceTimePoint>& pts) {
  std::vector<std::uint8_t> flags(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool blocked = false;
    for (std::size_t j = 0; j < i; ++j)
      if (flags[j] && squared_distance(pts[i].x, pts[j].x) < 4.0) blocked = true;
    flags[i] = blocked ? 0 : 1;
  }
  return flags;
}

std::vector<SpaceTimePoint> random_points(std::uint64_t seed, int n, int dim,
                                          double side, double tau) {
  CounterRng rng(seed);
  std::vector<SpaceTimePoint> pts(n);
  for (auto& p : pts) {
    p.x.resize(dim);
    for (int k = 0; k < dim; ++k) p.x[k] = rng.next_uniform(0.0, side);
    p.t = rng.next_uniform(0.0, tau);
  }
  std::sort(pts.begin(), pts.end(), arrival_less);
  return pts;
}

}  // namespace

TEST_CASE("overlaps: open balls of radius one") {
  CHECK(overlaps({0.0}, {1.9}));
  CHECK(!overlaps({0.0}, {2.0}));
  CHECK(overlaps({0.0, 0.0}, {1.2, 1.2}));  // sqrt(2.88) < 2
  const Vec lo{0.0}, hi{0.0, 1.0};
  CHECK_THROWS_AS(overlaps(lo, hi), std::invalid_argument);
}

TEST_CASE("pack_sequential fixtures") {
  CHECK(pack_sequential({}).points.empty());

  const auto single = pack_sequential({pt({0.3}, 0.7)});
  CHECK(single.accepted == std::vector<std::uint8_t>{1});

  // chain: second blocked by first, third clears both
  const auto chain3 =
      pack_sequential({pt({0.0}, 0.1), pt({1.0}, 0.2), pt({2.5}, 0.3)});
  CHECK(chain3.accepted == std::vector<std::uint8_t>{1, 0, 1});

  CHECK_THROWS_AS(pack_sequential({pt({0.0}, 0.5), pt({5.0}, 0.1)}),
                  std::invalid_argument);
}

TEST_CASE("pack_sequential equals the reference rule and is hard-core") {
  for (const int dim : {1, 2, 3}) {
    const auto pts = random_points(chain(100, dim), 400, dim, 10.0, 1.0);
    const auto sample = pack_sequential(pts);
    CHECK(sample.accepted == pack_reference(pts));
    CHECK(is_hard_core(sample.points, sample.accepted));
    // re-running the sequential rule reproduces the flags
    CHECK(pack_sequential(sample.points).accepted == sample.accepted);
  }
}

TEST_CASE("desorption: rate zero reduces to plain packing") {
  const CellField f = make_field(17, 1, FieldMode::continuum, 1.0);
  const Region region(Vec{0.0}, Vec{30.0});
  const auto desorbed = simulate_desorption(f, region, 0.0);
  const auto plain = pack_sequential(sample_window(f, region));
  CHECK(desorbed.accepted == plain.accepted);
}

TEST_CASE("desorption hand fixture") {
  auto a = pt({0.0}, 0.1);
  a.lifetime = 0.05;  // departs at 0.15
  auto b = pt({0.5}, 0.2);
  b.lifetime = 100.0;  // stays past tau
  const auto flags = desorption_flags({a, b}, 1.0);
  CHECK(flags == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("desorption against a brute-force event sweep") {
  for (int rep = 0; rep < 10; ++rep) {
    auto pts = random_points(chain(2000, rep), 250, 1, 12.0, 1.0);
    CounterRng rng(chain(3000, rep));
    for (auto& p : pts) p.lifetime = rng.next_exponential(2.0);
    const auto flags = desorption_flags(pts, 1.0);

    // reference: explicit present-set dynamics, checking the hard-core
    // invariant at every arrival
    std::vector<std::uint8_t> present(pts.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double now = pts[i].t;
      for (std::size_t j = 0; j < i; ++j)
        if (present[j] && pts[j].t + *pts[j].lifetime <= now) present[j] = 0;
      bool blocked = false;
      for (std::size_t j = 0; j < i; ++j)
        if (present[j] && squared_distance(pts[i].x, pts[j].x) < 4.0)
          blocked = true;
      if (!blocked) present[i] = 1;
      CHECK(is_hard_core(pts, present));
    }
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (present[j] && pts[j].t + *pts[j].lifetime <= 1.0) present[j] = 0;
    CHECK(flags == present);
  }
}

TEST_CASE("birth-growth fixtures") {
  // second seed falls inside the first cell grown to radius 0.8
  auto f1 = birth_growth_flags({pt({0.0}, 0.0), pt({0.5}, 0.8)}, 1.0, 0.0, 1.0);
  CHECK(f1 == std::vector<std::uint8_t>{1, 0});

  auto f2 = birth_growth_flags(
      {pt({0.0}, 0.0), pt({5.0}, 0.5), pt({1.5}, 1.0)}, 1.0, 0.0, 2.0);
  CHECK(f2 == std::vector<std::uint8_t>{1, 1, 1});

  CHECK_THROWS_AS(birth_growth_flags({}, 0.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("birth-growth at vanishing speed with radius 2 matches packing") {
  const auto pts = random_points(4242, 300, 2, 12.0, 1.0);
  const auto bg = birth_growth_flags(pts, 1e-12, 2.0, 1.0);
  CHECK(bg == pack_flags(pts));
}

TEST_CASE("birth-growth against a quadratic reference") {
  const auto pts = random_points(777, 200, 1, 10.0, 1.0);
  const auto flags = birth_growth_flags(pts, 0.7, 0.3, 1.0);
  std::vector<std::uint8_t> ref(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool covered = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (!ref[j]) continue;
      const double grown = 0.3 + 0.7 * (pts[i].t - pts[j].t);
      if (squared_distance(pts[i].x, pts[j].x) <= grown * grown) covered = true;
    }
    ref[i] = covered ? 0 : 1;
  }
  CHECK(flags == ref);
}

TEST_CASE("filter_by_mark") {
  const CellField f = make_field(5, 1, FieldMode::continuum, 1.0);
  auto sample = pack_sequential(sample_window(f, Region(Vec{0.0}, Vec{20.0})));
  REQUIRE(sample.size() > 5);

  PackedSample unmarked = sample;
  CHECK_THROWS_AS(filter_by_mark(unmarked, 0), std::invalid_argument);

  assign_marks(sample.points, 3);
  // all marks equal -> identity
  PackedSample uniform = sample;
  for (auto& p : uniform.points) p.mark = 1;
  const auto same = filter_by_mark(uniform, 1);
  CHECK(same.points.size() == sample.points.size());
  CHECK(same.accepted == sample.accepted);
  CHECK(filter_by_mark(uniform, 2).points.empty());

  // partition by mark and re-union recovers the accepted set
  std::size_t total_accepted = 0;
  for (int mark = 0; mark < 3; ++mark)
    total_accepted += filter_by_mark(sample, mark).accepted_count();
  CHECK(total_accepted == sample.accepted_count());
}
