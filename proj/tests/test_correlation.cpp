#include <doctest.h>

#include <cmath>

#include "rsalab/correlation.hpp"
#include "rsalab/oracle.hpp"
#include "rsalab/rng.hpp"

using namespace rsalab;

namespace {

SpaceTimePoint pt(Vec x, double t) {
  SpaceTimePoint p;
  p.x = std::move(x);
  p.t = t;
  return p;
}

const CellField kProto = make_field(100, 1, FieldMode::continuum, 1.0);

}  // namespace

TEST_CASE("estimate_rbar: trivial and degenerate cases") {
  // a test point at time zero has an empty backward cone
  const auto at_zero = estimate_rbar({pt({0.0}, 0.0)}, kProto, 50, true);
  CHECK(at_zero.value == 1.0);
  CHECK(at_zero.standard_error == 0.0);

  // mutually overlapping test points with joint blocking: identically zero
  const auto overlap =
      estimate_rbar({pt({0.0}, 0.3), pt({1.5}, 0.9)}, kProto, 50, true);
  CHECK(overlap.value == 0.0);
  CHECK(overlap.standard_error == 0.0);
  CHECK(overlap.degenerate);

  CHECK_THROWS_AS(estimate_rbar({}, kProto, 10, true), std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_rbar({pt({0.0}, 0.3), pt({0.0}, 0.3)}, kProto, 10, true),
      std::invalid_argument);
}

TEST_CASE("estimate_rbar agrees with a brute-force insertion oracle") {
  const auto w = pt({0.0}, 0.5);
  const int n = 4000;
  const auto est = estimate_rbar({w}, kProto, n, true);
  int hits = 0;
  for (int s = 0; s < n; ++s) {
    const CellField f = sample_field(kProto, s);
    hits += brute_force_sigma_oracle(f, w, 0.0, 20.0) ? 1 : 0;
  }
  const double brute = static_cast<double>(hits) / n;
  // same fields, same decision problem: the estimates must coincide
  CHECK(est.value == doctest::Approx(brute));
}

TEST_CASE("joint and literal rbar semantics coincide for one test point") {
  const std::vector<SpaceTimePoint> tests{pt({0.0}, 0.4)};
  const auto joint = estimate_rbar(tests, kProto, 2000, true);
  const auto solo = estimate_rbar(tests, kProto, 2000, false);
  CHECK(joint.value == doctest::Approx(solo.value));
}

TEST_CASE("r1_profile: vanishing past tau, exactly monotone, calibrated") {
  const std::vector<double> grid{0.1, 0.3, 0.5, 0.7, 0.9, 1.2};
  const auto prof = r1_profile(kProto, grid, 4000);
  REQUIRE(prof.size() == grid.size());
  CHECK(prof.back().estimate.value == 0.0);  // h(t) = 0 past tau
  for (std::size_t i = 1; i + 1 < prof.size(); ++i)
    CHECK(prof[i].estimate.value <= prof[i - 1].estimate.value);
  // kinetics: value at t equals the rod-model insertion probability at 2t
  for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
    const double g = adaptive_simpson(
        [](double v) { return v < 1e-8 ? 1.0 - v / 2.0 : -std::expm1(-v) / v; },
        0.0, 2.0 * prof[i].t, 1e-10);
    const double phi = std::exp(-2.0 * g);
    CHECK(std::abs(prof[i].estimate.value - phi) <
          4.0 * prof[i].estimate.standard_error + 1e-9);
  }
}

TEST_CASE("r1_profile integrates to the spatial intensity (Fubini)") {
  // fine grid over [0, tau]; trapezoid of r1(t) vs accepted density
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(i / 40.0);
  const auto prof = r1_profile(kProto, grid, 20000);
  double integral = 0.0;
  for (std::size_t i = 1; i < prof.size(); ++i)
    integral += 0.5 * (prof[i].estimate.value + prof[i - 1].estimate.value) *
                (grid[i] - grid[i - 1]);
  const double oracle = renyi_density_oracle(1.0);
  CHECK(std::abs(integral - oracle) < 0.004);  // MC + trapezoid error budget
}

TEST_CASE("lattice r1 decay: positive rate below the bare-clock bound") {
  const CellField lat = make_field(200, 1, FieldMode::lattice, kUnboundedTime);
  std::vector<double> grid;
  for (double t = 0.0; t <= 4.0 + 1e-9; t += 0.5) grid.push_back(t);
  std::vector<ProfilePoint> curve;
  const auto fit = lattice_r1_decay(lat, grid, 20000, &curve);
  CHECK(fit.rate > 0.0);
  CHECK(fit.r_squared > 0.9);
  CHECK(curve.front().estimate.value == 1.0);  // t = 0 is never blocked
  for (const auto& c : curve)
    CHECK(c.estimate.value <=
          std::exp(-c.t) + 3.0 * c.estimate.standard_error);
}

TEST_CASE("spatial pair correlation: hard core and far-field factorization") {
  const Region window = Region::cube(1, 60.0);
  std::vector<PackedSample> samples;
  for (int r = 0; r < 150; ++r)
    samples.push_back(
        pack_window_infinite(sample_field(kProto, r), window));
  std::vector<double> edges;
  for (double e = 0.0; e <= 12.0 + 1e-9; e += 0.5) edges.push_back(e);
  const auto corr = spatial_pair_correlation(samples, edges);

  // bins inside the exclusion zone are exactly zero and flagged empty
  for (std::size_t b = 0; b < corr.n_bins(); ++b) {
    if (corr.bin_edges[b + 1] <= 2.0) {
      CHECK(corr.estimates[b] == 0.0);
      CHECK(corr.bin_empty(b));
    }
  }
  // far bins factorize to the squared intensity
  const double r1sq = corr.intensity * corr.intensity;
  for (std::size_t b = 0; b < corr.n_bins(); ++b) {
    if (corr.bin_edges[b] >= 10.0)
      CHECK(std::abs(corr.estimates[b] - r1sq) <
            3.0 * (corr.standard_errors[b] + 1e-12) + 6.0 * corr.intensity_se);
  }
  CHECK(corr.intensity == doctest::Approx(renyi_density_oracle(1.0)).epsilon(0.05));

  const std::vector<double> bad_edges{1.0, 2.0};
  CHECK_THROWS_AS(spatial_pair_correlation(samples, bad_edges),
                  std::invalid_argument);
}

TEST_CASE("estimate_C_corr on an independence baseline returns the intensity") {
  // identity acceptance on raw Poisson input: r2 == r1^2, so C == r1
  const Region window = Region::cube(1, 240.0);
  std::vector<PackedSample> samples;
  for (int r = 0; r < 150; ++r) {
    PackedSample s;
    s.points = sample_window(sample_field(kProto, 900 + r), window);
    s.accepted.assign(s.points.size(), 1);
    s.region = window;
    samples.push_back(std::move(s));
  }
  std::vector<double> edges;
  for (double e = 0.0; e <= 8.0 + 1e-9; e += 0.5) edges.push_back(e);
  const auto corr = spatial_pair_correlation(samples, edges);
  const auto c = estimate_C_corr(corr);
  CHECK(c.value == doctest::Approx(corr.intensity).epsilon(0.12));
}

TEST_CASE("estimate_C_var on synthetic counts") {
  // counts ~ C * lambda^d * vol by construction
  std::vector<double> lambdas{8.0, 16.0, 32.0};
  std::vector<std::vector<double>> counts;
  CounterRng rng(77);
  for (const double lam : lambdas) {
    std::vector<double> c;
    for (int r = 0; r < 4000; ++r) {
      double acc = 0.0;
      for (int k = 0; k < 16; ++k)
        acc += normal_quantile(rng.next_unit() * 0.999998 + 1e-6);
      c.push_back(acc * std::sqrt(0.25 * lam / 16.0));
    }
    counts.push_back(std::move(c));
  }
  const auto est = estimate_C_var(lambdas, counts, 1, 1.0);
  CHECK(est.value == doctest::Approx(0.25).epsilon(0.1));
  CHECK(est.normalized_variance.size() == 3);
}

TEST_CASE("moments_from_correlations: degenerate and analytic reductions") {
  BinnedCorrelation r2;
  r2.bin_edges = {0.0, 1.0, 2.0};
  r2.estimates = {0.09, 0.09};
  r2.standard_errors = {0.0, 0.0};
  r2.pair_counts = {1, 1};
  r2.intensity = 0.3;
  r2.dimension = 1;

  // zero-volume region
  const auto zero = moments_from_correlations({0.0, 1.0}, {0.3, 0.3}, r2, Region());
  CHECK(zero.mean == 0.0);
  CHECK(zero.variance == 0.0);

  // constant r1 with r2 = r1^2: variance reduces to the mean
  const Region box(Vec{0.0}, Vec{5.0});
  const auto mp = moments_from_correlations({0.0, 1.0}, {0.3, 0.3}, r2, box);
  CHECK(mp.mean == doctest::Approx(1.5));
  CHECK(mp.variance == doctest::Approx(mp.mean).epsilon(1e-6));
}

TEST_CASE("predicted moments match direct simulation") {
  // estimate r1(t) and r2(s), then predict moments of the count in a box
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  const auto prof = r1_profile(kProto, grid, 30000);
  std::vector<double> r1_vals;
  for (const auto& p : prof) r1_vals.push_back(p.estimate.value);

  const Region window = Region::cube(1, 60.0);
  std::vector<PackedSample> samples;
  for (int r = 0; r < 400; ++r)
    samples.push_back(pack_window_infinite(sample_field(kProto, 3000 + r), window));
  std::vector<double> edges;
  for (double e = 0.0; e <= 12.0 + 1e-9; e += 0.25) edges.push_back(e);
  const auto corr = spatial_pair_correlation(samples, edges);

  const Region target(Vec{0.0}, Vec{10.0});
  const auto mp = moments_from_correlations(grid, r1_vals, corr, target);

  std::vector<double> direct;
  for (int r = 0; r < 400; ++r)
    direct.push_back(static_cast<double>(
        pack_window_infinite(sample_field(kProto, 7000 + r), target)
            .accepted_count()));
  const auto ms = mean_se(direct);
  CHECK(std::abs(mp.mean - ms.mean) < 3.0 * (ms.se + 0.02));
  const double var_direct = sample_variance(direct);
  const double var_se = var_direct * std::sqrt(2.0 / 399.0);
  CHECK(std::abs(mp.variance - var_direct) < 4.0 * var_se + 0.05);
}

TEST_CASE("clustering gap: overlap saturates, distance decorrelates") {
  const std::vector<SpaceTimePoint> k_tuple{pt({0.0}, 0.5)};
  const auto res =
      clustering_gap(k_tuple, k_tuple, {0.5, 4.0, 8.0}, kProto, 4000);
  REQUIRE(res.points.size() == 3);
  // overlapping tuples: joint probability vanishes, so the gap is the full
  // product
  CHECK(res.points[0].rbar_joint == 0.0);
  CHECK(res.points[0].gap == doctest::Approx(res.points[0].rbar_product));
  CHECK(res.points[0].gap > 0.02);
  // distant tuples: gap below noise, cones rarely intersect
  CHECK(res.points[2].gap < 0.02);
  CHECK((res.points[2].cone_intersect_prob <=
             res.points[1].cone_intersect_prob ||
         res.points[1].cone_intersect_prob == 0.0));
  // the cone-intersection bound of the factorization gap
  for (const auto& p : res.points) {
    CHECK(p.gap <= 3.0 * std::sqrt(p.cone_intersect_prob) + 3.0 * p.gap_se + 1e-12);
  }
}
