// Acceptance suite: quantitative checks of the laboratory's contracts, one
// pass/fail line per criterion. Every tolerance is pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsalab/causal.hpp"
#include "rsalab/correlation.hpp"
#include "rsalab/experiment.hpp"
#include "rsalab/graph_measures.hpp"
#include "rsalab/limits.hpp"
#include "rsalab/oracle.hpp"
#include "rsalab/packing.hpp"
#include "rsalab/rng.hpp"
#include "rsalab/stats.hpp"

using namespace rsalab;

namespace {

constexpr std::uint64_t kSeed = 20240817;

int g_workers = 1;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double x) { return format_double(x); }

SpaceTimePoint pt(Vec x, double t) {
  SpaceTimePoint p;
  p.x = std::move(x);
  p.t = t;
  return p;
}

// ---------------------------------------------------------------------------
// 1. Fixture exactness: the hand-computed examples, verified bit for bit.
Outcome criterion_fixtures() {
  Outcome out;

  // packing chain
  const auto chain3 =
      pack_sequential({pt({0.0}, 0.1), pt({1.0}, 0.2), pt({2.5}, 0.3)});
  out.require(chain3.accepted == std::vector<std::uint8_t>{1, 0, 1},
              "packing chain flags");
  out.require(pack_sequential({pt({0.5}, 0.7)}).accepted ==
                  std::vector<std::uint8_t>{1},
              "single ball packs");
  out.require(overlaps({0.0}, {1.9}) && !overlaps({0.0}, {2.0}) &&
                  overlaps({0.0, 0.0}, {1.2, 1.2}),
              "overlap predicate");

  // causal graph and cones on the chain
  const std::vector<SpaceTimePoint> chain{pt({0.0}, 0.1), pt({1.0}, 0.2),
                                          pt({2.5}, 0.3)};
  const auto g = build_causal_graph(chain);
  out.require(g.out[0] == std::vector<std::size_t>{1} &&
                  g.out[1] == std::vector<std::size_t>{2} && g.out[2].empty(),
              "causal graph edges");
  const auto g2 = build_causal_graph({pt({0.0}, 0.0), pt({2.0}, 0.1)});
  out.require(g2.out[0] == std::vector<std::size_t>{1},
              "graph includes distance exactly 2");
  out.require(backward_cone(chain[2], chain).members.size() == 3 &&
                  backward_cone(chain[1], chain).members.size() == 2 &&
                  backward_cone(pt({40.0}, 0.5), chain).members.size() == 1,
              "backward cones");

  // lattice jamming
  out.require(jam_priority_flags({{0}, {1}, {2}}, {0.2, 0.5, 0.1}) ==
                  std::vector<std::uint8_t>{1, 0, 1},
              "priority jam fixture");
  out.require(jam_priority_flags({{9}}, {1.0}) == std::vector<std::uint8_t>{1},
              "single site jams");

  // birth-growth
  out.require(birth_growth_flags({pt({0.0}, 0.0), pt({0.5}, 0.8)}, 1.0, 0.0,
                                 1.0) == std::vector<std::uint8_t>{1, 0},
              "birth-growth rejection");
  out.require(birth_growth_flags({pt({0.0}, 0.0), pt({5.0}, 0.5),
                                  pt({1.5}, 1.0)},
                                 1.0, 0.0, 2.0) ==
                  std::vector<std::uint8_t>{1, 1, 1},
              "birth-growth acceptance");

  // desorption sweep
  auto a = pt({0.0}, 0.1);
  a.lifetime = 0.05;
  auto b = pt({0.5}, 0.2);
  b.lifetime = 100.0;
  out.require(desorption_flags({a, b}, 1.0) == std::vector<std::uint8_t>{0, 1},
              "desorption sweep");

  // nearest-neighbor weights
  const auto nn = build_nn_graph({{0.0}, {1.0}, {5.0}});
  out.require(nn.weights[0] == 0.5 && nn.weights[1] == 2.5 &&
                  nn.weights[2] == 2.0 && nn.total_edge_length == 5.0,
              "nn weights");
  const auto nn2 = build_nn_graph({{0.0, 0.0}, {3.0, 0.0}});
  out.require(nn2.weights[0] == 1.5 && nn2.weights[1] == 1.5, "nn pair");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Infinite-volume decisions agree with brute force on a padded box.
Outcome criterion_oracle_agreement() {
  Outcome out;
  const double margin = 20.0;
  for (const int dim : {1, 2}) {
    const int n = 10000;
    std::vector<std::uint8_t> lazy(n), brute(n);
    std::vector<double> cone_radius(n, 0.0);
    parallel_for(n, g_workers, [&](std::size_t i) {
      const CellField f = make_field(chain(chain(kSeed, dim), i), dim,
                                     FieldMode::continuum, 1.0);
      CounterRng rng(chain(chain(kSeed + 1, dim), i));
      Vec x(dim);
      for (int k = 0; k < dim; ++k) x[k] = rng.next_uniform(-1.0, 1.0);
      const auto w = pt(x, rng.next_uniform(0.0, 1.0));
      lazy[i] = sigma_infinite(w, f) ? 1 : 0;
      brute[i] = brute_force_sigma_oracle(f, w, 0.0, margin) ? 1 : 0;
      if (lazy[i] != brute[i]) {
        cone_radius[i] =
            causal_cone_infinite(w, f, ConeDirection::backward).spatial_radius;
      }
    });
    int disagreements = 0, attributed = 0;
    for (int i = 0; i < n; ++i) {
      if (lazy[i] == brute[i]) continue;
      ++disagreements;
      // only a cone reaching past the oracle's margin can explain a split
      if (cone_radius[i] > margin - 2.0) ++attributed;
    }
    const double agree = 1.0 - static_cast<double>(disagreements) / n;
    out.note("d=" + std::to_string(dim) + " agreement " + fmt(agree));
    out.require(agree >= 0.999,
                "agreement below 99.9% in d=" + std::to_string(dim));
    out.require(attributed == disagreements,
                "unattributed disagreement in d=" + std::to_string(dim));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 3. d=1 mean density against the kinetics quadrature.
Outcome criterion_density() {
  Outcome out;
  const double window = 10000.0;
  const int reps = 100;
  for (const double tau : {1.0, 5.0}) {
    const CellField proto =
        make_field(chain(kSeed, static_cast<std::uint64_t>(tau)), 1,
                   FieldMode::continuum, tau);
    std::vector<double> dens(reps);
    parallel_for(reps, g_workers, [&](std::size_t r) {
      const CellField f = sample_field(proto, r);
      dens[r] = static_cast<double>(
                    pack_window_infinite(f, Region(Vec{0.0}, Vec{window}))
                        .accepted_count()) /
                window;
    });
    const auto ms = mean_se(dens);
    const double oracle = renyi_density_oracle(tau);
    const double z = (ms.mean - oracle) / ms.se;
    out.note("tau=" + fmt(tau) + ": mc=" + fmt(ms.mean) + " oracle=" +
             fmt(oracle) + " z=" + fmt(z));
    out.require(std::abs(ms.mean - oracle) <= 3.0 * ms.se,
                "density off by more than 3 SE at tau=" + fmt(tau));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 4. Time decay of the one-point correlation.
Outcome criterion_time_decay() {
  Outcome out;

  // continuum, d=1: power-law window t in [2, 20] needs input up to t = 20
  std::vector<double> t_grid;
  for (int i = 0; i < 10; ++i)
    t_grid.push_back(2.0 * std::pow(10.0, i / 9.0));  // 2 .. 20, log-spaced
  const CellField cproto =
      make_field(chain(kSeed, 41), 1, FieldMode::continuum, 20.0);
  const int n_cont = 2000000;
  const int blocks = 64;
  std::vector<std::vector<std::uint64_t>> hits(
      blocks, std::vector<std::uint64_t>(t_grid.size(), 0));
  parallel_for(blocks, g_workers, [&](std::size_t b) {
    for (int s = static_cast<int>(b); s < n_cont; s += blocks) {
      const CellField f = sample_field(cproto, s);
      const double t_star = first_blocking_time(f, {0.0}, 20.0);
      for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_star) ++hits[b][i];
    }
  });
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    std::uint64_t total = 0;
    for (int b = 0; b < blocks; ++b) total += hits[b][i];
    const double p = static_cast<double>(total) / n_cont;
    if (p > 0.0) {
      lx.push_back(std::log(t_grid[i]));
      ly.push_back(std::log(p));
    }
  }
  const LinearFit cont_fit = linear_fit(lx, ly);
  out.note("continuum log-log slope " + fmt(cont_fit.slope));
  out.require(cont_fit.slope >= -2.3 && cont_fit.slope <= -1.7,
              "continuum slope outside [-2.3, -1.7]");

  // lattice: exponential decay below the bare-clock bound
  const CellField lproto =
      make_field(chain(kSeed, 42), 1, FieldMode::lattice, kUnboundedTime);
  std::vector<double> lt_grid;
  for (double t = 0.5; t <= 4.0 + 1e-9; t += 0.5) lt_grid.push_back(t);
  std::vector<ProfilePoint> curve;
  const DecayFit lat_fit = lattice_r1_decay(lproto, lt_grid, 200000, &curve);
  out.note("lattice rate " + fmt(lat_fit.rate));
  out.require(lat_fit.rate > 0.0, "lattice decay rate not positive");
  for (const auto& c : curve) {
    out.require(c.estimate.value <=
                    std::exp(-c.t) + 3.0 * c.estimate.standard_error,
                "lattice r1(" + fmt(c.t) + ") above exp(-t) + 3 SE");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 5. Exponential clustering and the cone-intersection bound.
Outcome criterion_clustering() {
  Outcome out;
  const CellField proto =
      make_field(chain(kSeed, 5), 1, FieldMode::continuum, 1.0);
  std::vector<double> separations;
  for (double s = 4.0; s <= 12.0 + 1e-9; s += 1.0) separations.push_back(s);
  const auto w0 = pt({0.0}, 0.5);

  const int n = 400000;
  struct Acc {
    double a = 0, b = 0, ab = 0, aa = 0, bb = 0, abab = 0, ab_a = 0, ab_b = 0,
           a_b = 0;
    std::uint64_t cones = 0;
  };
  std::vector<ClusteringGapPoint> points;
  for (const double sep : separations) {
    const auto shifted = pt({sep}, 0.5);
    std::vector<Acc> accs(64);
    parallel_for(accs.size(), g_workers, [&](std::size_t blk) {
      Acc acc;
      for (int s = static_cast<int>(blk); s < n; s += 64) {
        const CellField f = sample_field(proto, s);
        const double a = sigma_infinite(w0, f) ? 1.0 : 0.0;
        const double b = sigma_infinite(shifted, f) ? 1.0 : 0.0;
        const auto joint = sigma_joint({w0, shifted}, f);
        const double ab = (joint[0] && joint[1]) ? 1.0 : 0.0;
        acc.a += a;
        acc.b += b;
        acc.ab += ab;
        acc.aa += a * a;
        acc.bb += b * b;
        acc.abab += ab * ab;
        acc.ab_a += ab * a;
        acc.ab_b += ab * b;
        acc.a_b += a * b;
        const auto cone_a = causal_cone_infinite(w0, f, ConeDirection::backward);
        std::set<std::uint64_t> ids;
        for (const auto& m : cone_a.members)
          if (m.uid) ids.insert(m.uid);
        const auto cone_b =
            causal_cone_infinite(shifted, f, ConeDirection::backward);
        for (const auto& m : cone_b.members) {
          if (m.uid && ids.count(m.uid)) {
            ++acc.cones;
            break;
          }
        }
      }
      accs[blk] = acc;
    });
    Acc t;
    for (const auto& acc : accs) {
      t.a += acc.a;
      t.b += acc.b;
      t.ab += acc.ab;
      t.aa += acc.aa;
      t.bb += acc.bb;
      t.abab += acc.abab;
      t.ab_a += acc.ab_a;
      t.ab_b += acc.ab_b;
      t.a_b += acc.a_b;
      t.cones += acc.cones;
    }
    const double nd = n;
    const double ma = t.a / nd, mb = t.b / nd, mab = t.ab / nd;
    ClusteringGapPoint p;
    p.separation = sep;
    p.gap = std::abs(mab - ma * mb);
    const double c_abab = t.abab / nd - mab * mab;
    const double c_aa = t.aa / nd - ma * ma;
    const double c_bb = t.bb / nd - mb * mb;
    const double c_ab_a = t.ab_a / nd - mab * ma;
    const double c_ab_b = t.ab_b / nd - mab * mb;
    const double c_a_b = t.a_b / nd - ma * mb;
    const double var_g = c_abab + mb * mb * c_aa + ma * ma * c_bb -
                         2.0 * mb * c_ab_a - 2.0 * ma * c_ab_b +
                         2.0 * ma * mb * c_a_b;
    p.gap_se = std::sqrt(std::max(0.0, var_g) / nd);
    p.cone_intersect_prob = static_cast<double>(t.cones) / nd;
    p.below_noise_floor = p.gap <= 2.0 * p.gap_se;
    points.push_back(p);
  }

  std::vector<double> gx, gy;
  std::ostringstream table;
  for (const auto& p : points) {
    table << " " << p.separation << ":" << fmt(p.gap)
          << (p.below_noise_floor ? "(floor)" : "");
    if (!p.below_noise_floor) {
      gx.push_back(p.separation);
      gy.push_back(p.gap);
    }
    // Cauchy-Schwarz route: three error terms, each bounded by sqrt(P).
    out.require(p.gap <=
                    3.0 * std::sqrt(p.cone_intersect_prob) + 3.0 * p.gap_se,
                "clustering bound violated at separation " + fmt(p.separation));
  }
  out.note("gaps:" + table.str());
  out.require(gx.size() >= 3, "too few separations above the noise floor");
  if (gx.size() >= 3) {
    const DecayFit fit = fit_exponential_decay(gx, gy);
    out.note("gap decay rate " + fmt(fit.rate));
    out.require(fit.rate > 0.0, "gap decay rate not positive");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 6. Causal-cone tails.
Outcome criterion_cone_tail() {
  Outcome out;
  std::vector<double> r_grid;
  for (double r = 2.0; r <= 10.0 + 1e-9; r += 1.0) r_grid.push_back(r);
  const CellField proto =
      make_field(chain(kSeed, 6), 1, FieldMode::continuum, 1.0);
  const auto res = cone_tail(proto, r_grid, 4.0, 600000);
  out.require(res.fit_valid, "no uncensored escape points to fit");
  if (res.fit_valid) {
    out.note("rate " + fmt(res.fit.rate) + " r2 " + fmt(res.fit.r_squared) +
             " p(2)=" + fmt(res.escape_probability.front()));
    out.require(res.fit.rate > 0.0, "escape decay rate not positive");
    out.require(res.fit.r_squared >= 0.9, "log-linearity r2 below 0.9");
  }
  for (std::size_t i = 1; i < res.escape_probability.size(); ++i)
    out.require(res.escape_probability[i] <= res.escape_probability[i - 1],
                "escape probability not monotone");
  return out;
}

// ---------------------------------------------------------------------------
// Shared: gaussianity thresholds of criterion 7 applied to a report.
void check_report(Outcome& out, const GaussianityReport& rep,
                  const std::string& label) {
  for (std::size_t b = 0; b < rep.per_box.size(); ++b) {
    const auto& st = rep.per_box[b];
    const std::string tag = label + " box" + std::to_string(b);
    out.require(std::abs(st.skewness) <= 0.15,
                tag + " |skew|=" + fmt(std::abs(st.skewness)) + " > 0.15");
    out.require(std::abs(st.excess_kurtosis) <= 0.3,
                tag + " |exkurt|=" + fmt(std::abs(st.excess_kurtosis)) +
                    " > 0.3");
    out.require(st.ad_p > 0.01, tag + " AD p=" + fmt(st.ad_p) + " <= 0.01");
  }
  for (std::size_t i = 0; i < rep.per_box.size(); ++i) {
    for (std::size_t j = 0; j < rep.per_box.size(); ++j) {
      const double pred = rep.predicted_cov[i][j];
      const double emp = rep.empirical_cov[i][j];
      const std::string tag = label + " cov(" + std::to_string(i) + "," +
                              std::to_string(j) + ")";
      if (pred != 0.0) {
        out.require(std::abs(emp - pred) <= 0.15 * std::abs(pred),
                    tag + " off by " + fmt(std::abs(emp - pred) / pred));
      } else {
        out.require(std::abs(emp) <= 3.0 * rep.empirical_cov_se[i][j],
                    tag + " nonzero beyond 3 SE");
      }
    }
  }
}

std::vector<Region> acceptance_boxes() {
  return {Region(Vec{0.0}, Vec{1.0}), Region(Vec{2.0}, Vec{3.0}),
          Region(Vec{5.0}, Vec{6.0}), Region(Vec{5.5}, Vec{6.5})};
}

double estimate_c_by_correlation(std::uint64_t seed) {
  const CellField proto = make_field(seed, 1, FieldMode::continuum, 1.0);
  const Region window = Region::cube(1, 400.0);
  const int reps = 400;
  std::vector<PackedSample> samples(reps);
  parallel_for(reps, g_workers, [&](std::size_t r) {
    samples[r] = pack_window_infinite(sample_field(proto, r), window);
  });
  std::vector<double> edges;
  for (double e = 0.0; e <= 12.0 + 1e-9; e += 0.25) edges.push_back(e);
  const auto corr = spatial_pair_correlation(samples, edges);
  return estimate_C_corr(corr).value;
}

// 7. Gaussian limits of the packing measures.
Outcome criterion_clt() {
  Outcome out;
  const double lambda = 64.0;
  const int reps = 1000;
  const auto boxes = acceptance_boxes();
  const Region A(Vec{-1.0}, Vec{8.0});
  const CellField proto =
      make_field(chain(kSeed, 7), 1, FieldMode::continuum, 1.0);
  const double c_hat = estimate_c_by_correlation(chain(kSeed, 70));
  out.note("C_hat(corr) = " + fmt(c_hat));

  for (const SampleMode mode :
       {SampleMode::infinite_volume, SampleMode::finite_volume}) {
    std::vector<RescaledVectorSample> samples(reps);
    parallel_for(reps, g_workers, [&](std::size_t r) {
      const CellField f = proto.with_seed(replicate_seed(proto.master_seed, r));
      samples[r] = rescaled_sample(f, mode, lambda, boxes, A);
    });
    center_samples(samples);
    const auto rep = gaussianity_report(samples, c_hat);
    check_report(out, rep, to_string(mode));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 8. Covariance constant: quadrature route vs variance route.
Outcome criterion_c_cross_check() {
  Outcome out;
  const CellField proto =
      make_field(chain(kSeed, 8), 1, FieldMode::continuum, 1.0);

  const Region window = Region::cube(1, 400.0);
  const int reps = 400;
  std::vector<PackedSample> samples(reps);
  parallel_for(reps, g_workers, [&](std::size_t r) {
    samples[r] = pack_window_infinite(sample_field(proto, r), window);
  });
  std::vector<double> edges;
  for (double e = 0.0; e <= 12.0 + 1e-9; e += 0.25) edges.push_back(e);
  const auto corr = spatial_pair_correlation(samples, edges);
  const auto c_corr = estimate_C_corr(corr);

  const std::vector<double> lambdas{8.0, 16.0, 32.0, 64.0};
  const int var_reps = 800;
  const Region unit = Region(Vec{0.0}, Vec{1.0});
  const CellField var_proto = proto.with_seed(chain(proto.master_seed, 88));
  std::vector<std::vector<double>> counts(lambdas.size(),
                                          std::vector<double>(var_reps));
  parallel_for(var_reps, g_workers, [&](std::size_t r) {
    const CellField f = sample_field(var_proto, r);
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      counts[li][r] = rescaled_sample(f, SampleMode::infinite_volume,
                                      lambdas[li], {unit})
                          .raw[0];
    }
  });
  const auto c_var = estimate_C_var(lambdas, counts, 1, 1.0);

  const double mid = 0.5 * (c_corr.value + c_var.value);
  const double rel = std::abs(c_corr.value - c_var.value) / mid;
  out.note("C_corr=" + fmt(c_corr.value) + " C_var=" + fmt(c_var.value) +
           " rel=" + fmt(rel) + " r1=" + fmt(corr.intensity));
  out.require(rel <= 0.15, "corr and var estimates differ by " + fmt(rel));
  out.require(c_corr.value < corr.intensity, "C_corr not below the intensity");
  out.require(c_var.value < corr.intensity, "C_var not below the intensity");
  return out;
}

// ---------------------------------------------------------------------------
// 9. Boundary scaling of the finite/infinite discrepancy processes.
Outcome criterion_boundary_scaling() {
  Outcome out;
  const std::vector<double> lambdas{8.0, 16.0, 32.0, 64.0};
  const int reps = 200;

  struct Series {
    std::vector<double> mean_plus, var_plus, mean_minus, var_minus;
  };
  const auto run_dim = [&](int dim) {
    const Region A = Region::cube(dim, 1.0);
    const CellField proto =
        make_field(chain(kSeed, 90 + dim), dim, FieldMode::continuum, 1.0);
    Series s;
    for (const double lambda : lambdas) {
      std::vector<double> plus(reps), minus(reps);
      parallel_for(reps, g_workers, [&](std::size_t r) {
        const auto diff = boundary_processes(sample_field(proto, r), lambda, A);
        plus[r] = static_cast<double>(diff.plus_count());
        minus[r] = static_cast<double>(diff.minus_count());
      });
      s.mean_plus.push_back(mean_se(plus).mean);
      s.var_plus.push_back(sample_variance(plus));
      s.mean_minus.push_back(mean_se(minus).mean);
      s.var_minus.push_back(sample_variance(minus));
    }
    return s;
  };

  const auto fit = [&](const std::vector<double>& values) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (values[i] > 0.0) {
        lx.push_back(std::log(lambdas[i]));
        ly.push_back(std::log(values[i]));
      }
    }
    return linear_fit(lx, ly);
  };

  const Series s2 = run_dim(2);
  const std::vector<std::pair<std::string, const std::vector<double>*>>
      series2{{"mean+", &s2.mean_plus},
              {"var+", &s2.var_plus},
              {"mean-", &s2.mean_minus},
              {"var-", &s2.var_minus}};
  for (const auto& [name, series] : series2) {
    const auto f = fit(*series);
    out.note("d2 " + name + " slope " + fmt(f.slope) + " r2 " +
             fmt(f.r_squared));
    out.require(f.slope >= 0.7 && f.slope <= 1.3,
                "d=2 " + name + " slope outside 1.0±0.3");
    out.require(f.r_squared >= 0.9, "d=2 " + name + " r2 below 0.9");
  }

  const Series s1 = run_dim(1);
  const std::vector<std::pair<std::string, const std::vector<double>*>>
      series1{{"mean+", &s1.mean_plus},
              {"var+", &s1.var_plus},
              {"mean-", &s1.mean_minus},
              {"var-", &s1.var_minus}};
  for (const auto& [name, series] : series1) {
    const auto f = fit(*series);
    out.note("d1 " + name + " slope " + fmt(f.slope));
    out.require(std::abs(f.slope) <= 0.3,
                "d=1 " + name + " slope outside 0.0±0.3");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 10. Nearest-neighbor measures: stabilization tail and Gaussian limits.
Outcome criterion_nn() {
  Outcome out;
  const CellField proto =
      make_field(chain(kSeed, 10), 1, FieldMode::continuum, 1.0);

  // stabilization-radius tail over t in [2, 8]
  const int n_probes = 20000;
  const auto cfg = default_stabilization_config();
  std::vector<double> radii(n_probes);
  const CellField stab_proto = proto.with_seed(chain(proto.master_seed, 101));
  parallel_for(n_probes, g_workers, [&](std::size_t s) {
    radii[s] = stabilization_radius_probe(sample_field(stab_proto, s), cfg);
  });
  std::vector<double> tx, ty;
  for (double t = 2.0; t <= 8.0 + 1e-9; t += 1.0) {
    std::uint64_t hits = 0;
    for (const double r : radii)
      if (r > t) ++hits;
    const double p = static_cast<double>(hits) / n_probes;
    if (p > 0.0) {
      tx.push_back(t);
      ty.push_back(p);
    }
  }
  out.require(tx.size() >= 3, "stabilization tail unobservable");
  if (tx.size() >= 3) {
    const DecayFit fit = fit_exponential_decay(tx, ty);
    out.note("stab tail rate " + fmt(fit.rate) + " r2 " + fmt(fit.r_squared));
    out.require(fit.rate > 0.0, "stabilization tail slope not negative");
    out.require(fit.r_squared >= 0.9, "stabilization tail not log-linear");
  }

  // rescaled NN measures at lambda = 64, both modes, criterion-7 thresholds
  const double lambda = 64.0;
  const int reps = 1000;
  const auto boxes = acceptance_boxes();
  const Region A(Vec{-1.0}, Vec{8.0});
  for (const SampleMode mode :
       {SampleMode::infinite_volume, SampleMode::finite_volume}) {
    std::vector<RescaledVectorSample> samples(reps);
    parallel_for(reps, g_workers, [&](std::size_t r) {
      const CellField f = proto.with_seed(replicate_seed(proto.master_seed, r));
      samples[r] = nn_rescaled_sample(f, mode, lambda, boxes, A, 8.0);
    });
    center_samples(samples);
    double c_est = 0.0;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      std::vector<double> v;
      for (const auto& s : samples) v.push_back(s.centered_scaled[b]);
      c_est += sample_variance(v) / boxes[b].volume();
    }
    c_est /= static_cast<double>(boxes.size());
    const auto rep = gaussianity_report(samples, c_est);
    check_report(out, rep, std::string("nn-") + to_string(mode));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 11. Byte-identical reruns across worker counts.
Outcome criterion_determinism() {
  Outcome out;
  const auto base = std::filesystem::temp_directory_path() / "rsalab_acc";

  const auto digests_of = [](const nlohmann::json& manifest) {
    std::map<std::string, std::string> out_map;
    for (const auto& o : manifest.at("outputs"))
      out_map[o.at("file").get<std::string>()] =
          o.at("fnv1a64").get<std::string>();
    return out_map;
  };

  for (const std::string kind : {"pack", "clt", "cones"}) {
    ExperimentConfig c = default_config(kind);
    c.master_seed = chain(kSeed, 11);
    if (kind == "pack") {
      c.replicates = 50;
      c.region = Region(Vec{0.0}, Vec{200.0});
    } else if (kind == "clt") {
      c.replicates = 250;
      c.lambdas = {8.0};
      c.options["corr_replicates"] = 50;
      c.options["corr_window"] = 80.0;
    } else {
      c.options["n_samples"] = 20000;
    }
    std::map<std::string, std::string> first;
    for (const int workers : {1, 8}) {
      c.workers = workers;
      c.out_dir = (base / (kind + "_w" + std::to_string(workers))).string();
      std::filesystem::remove_all(c.out_dir);
      const auto run = run_experiment(c);
      const auto digests = digests_of(run.manifest);
      if (workers == 1) {
        first = digests;
      } else {
        out.require(digests == first,
                    kind + ": results differ between 1 and 8 workers");
      }
    }
    out.note(kind + " reproducible");
  }
  return out;
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  g_workers = resolve_workers(0);
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria{
      {1, "fixture exactness", criterion_fixtures},
      {2, "infinite-volume oracle equivalence", criterion_oracle_agreement},
      {3, "d=1 density law", criterion_density},
      {4, "time decay of r1", criterion_time_decay},
      {5, "exponential clustering", criterion_clustering},
      {6, "causal cone tails", criterion_cone_tail},
      {7, "Gaussian limit of packing measures", criterion_clt},
      {8, "covariance-constant cross-check", criterion_c_cross_check},
      {9, "boundary scaling", criterion_boundary_scaling},
      {10, "nearest-neighbor measures", criterion_nn},
      {11, "deterministic replay", criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.note(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n",
                out.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
