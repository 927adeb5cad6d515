#include "rsalab/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rsalab/grid_index.hpp"
#include "rsalab/oracle.hpp"
#include "rsalab/rng.hpp"

namespace rsalab {

std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index) {
  return chain(chain(master_seed, kTagReplicate), index);
}

CellField sample_field(const CellField& proto, std::uint64_t index) {
  return proto.with_seed(replicate_seed(proto.master_seed, index));
}

namespace {

bool tuples_mutually_overlap(const std::vector<SpaceTimePoint>& tests) {
  for (std::size_t i = 0; i < tests.size(); ++i)
    for (std::size_t j = i + 1; j < tests.size(); ++j)
      if (squared_distance(tests[i].x, tests[j].x) < 4.0) return true;
  return false;
}

}  // namespace

ProbabilityEstimate estimate_rbar(const std::vector<SpaceTimePoint>& tests,
                                  const CellField& proto, int n_samples,
                                  bool joint_blocking) {
  if (tests.empty())
    throw std::invalid_argument("estimate_rbar: need at least one test point");
  if (n_samples < 1)
    throw std::invalid_argument("estimate_rbar: n_samples >= 1");
  for (std::size_t i = 0; i < tests.size(); ++i)
    for (std::size_t j = i + 1; j < tests.size(); ++j)
      if (tests[i].x == tests[j].x && tests[i].t == tests[j].t)
        throw std::invalid_argument("estimate_rbar: duplicate test points");

  ProbabilityEstimate out;
  out.n_samples = static_cast<std::size_t>(n_samples);
  if (joint_blocking && tuples_mutually_overlap(tests)) {
    // The balls themselves intersect: the joint product is identically 0.
    out.degenerate = true;
    return out;
  }

  std::uint64_t hits = 0;
  for (int s = 0; s < n_samples; ++s) {
    const CellField field = sample_field(proto, static_cast<std::uint64_t>(s));
    bool all = true;
    if (joint_blocking) {
      const auto flags = sigma_joint(tests, field);
      for (const auto f : flags) all = all && f;
    } else {
      for (const auto& w : tests) {
        if (!sigma_infinite(w, field)) {
          all = false;
          break;
        }
      }
    }
    hits += all ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / n_samples;
  out.value = p;
  out.standard_error = std::sqrt(p * (1.0 - p) / n_samples);
  return out;
}

std::vector<ProfilePoint> r1_profile(const CellField& proto,
                                     const std::vector<double>& t_grid,
                                     int n_samples) {
  if (n_samples < 1)
    throw std::invalid_argument("r1_profile: n_samples >= 1");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("r1_profile: t_grid must be ascending");
  if (proto.mode == FieldMode::continuum) {
    for (const double t : t_grid)
      if (t < 0.0) throw std::invalid_argument("r1_profile: t >= 0");
  }

  const Vec origin(proto.dimension, 0.0);
  double t_max = t_grid.empty() ? 0.0 : t_grid.back();
  if (proto.mode == FieldMode::continuum) t_max = std::min(t_max, proto.tau);

  // One blocking time per sample decides the whole grid (common random
  // numbers), so the estimated profile is exactly non-increasing.
  std::vector<std::uint64_t> hits(t_grid.size(), 0);
  for (int s = 0; s < n_samples; ++s) {
    const CellField field = sample_field(proto, static_cast<std::uint64_t>(s));
    const double t_star = first_blocking_time(field, origin, t_max);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      if (t_grid[i] <= t_star) ++hits[i];
  }

  std::vector<ProfilePoint> out(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    out[i].t = t_grid[i];
    const bool vanishes =
        proto.mode == FieldMode::continuum && t_grid[i] > proto.tau;
    if (vanishes) {
      out[i].estimate.value = 0.0;  // input density indicator h(t) = 0
      out[i].estimate.standard_error = 0.0;
    } else {
      const double p = static_cast<double>(hits[i]) / n_samples;
      out[i].estimate.value = p;
      out[i].estimate.standard_error = std::sqrt(p * (1.0 - p) / n_samples);
    }
    out[i].estimate.n_samples = static_cast<std::size_t>(n_samples);
  }
  return out;
}

DecayFit lattice_r1_decay(const CellField& proto,
                          const std::vector<double>& t_grid, int n_samples,
                          std::vector<ProfilePoint>* curve) {
  if (proto.mode != FieldMode::lattice)
    throw std::invalid_argument("lattice_r1_decay: lattice mode only");
  const auto profile = r1_profile(proto, t_grid, n_samples);
  if (curve) *curve = profile;
  std::vector<double> xs, ys;
  for (const auto& pt : profile) {
    if (pt.estimate.value <= 2.0 * pt.estimate.standard_error) continue;
    xs.push_back(pt.t);
    ys.push_back(pt.estimate.value);
  }
  return fit_exponential_decay(xs, ys);  // throws when too few usable points
}

BinnedCorrelation spatial_pair_correlation(
    const std::vector<PackedSample>& samples,
    const std::vector<double>& bin_edges) {
  if (samples.empty())
    throw std::invalid_argument("spatial_pair_correlation: no samples");
  if (bin_edges.size() < 2 || bin_edges.front() != 0.0)
    throw std::invalid_argument(
        "spatial_pair_correlation: bin edges must start at 0");
  for (std::size_t i = 1; i < bin_edges.size(); ++i)
    if (!(bin_edges[i] > bin_edges[i - 1]))
      throw std::invalid_argument(
          "spatial_pair_correlation: edges must ascend");

  const Region& window = samples.front().region;
  const int dim = window.dimension();
  const std::size_t n_bins = bin_edges.size() - 1;
  const double s_max = bin_edges.back();

  // Per-bin reference sets (minus sampling) and their volumes.
  std::vector<double> ref_volume(n_bins);
  std::vector<Region> ref_region(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    ref_region[b] = window.eroded(bin_edges[b + 1]);
    ref_volume[b] = ref_region[b].volume();
    if (ref_volume[b] <= 0.0)
      throw std::invalid_argument(
          "spatial_pair_correlation: window too small for the largest bin");
  }
  std::vector<double> shell(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b)
    shell[b] = shell_volume(dim, bin_edges[b], bin_edges[b + 1]);

  std::vector<std::vector<double>> per_sample(n_bins);
  std::vector<std::uint64_t> pair_counts(n_bins, 0);
  std::vector<double> intensities;

  for (const auto& sample : samples) {
    const auto accepted = sample.accepted_positions();
    intensities.push_back(static_cast<double>(accepted.size()) /
                          window.volume());
    GridIndex grid(dim, std::max(2.0, s_max / 3.0));
    for (std::size_t i = 0; i < accepted.size(); ++i)
      grid.insert(i, accepted[i]);

    std::vector<std::uint64_t> counts(n_bins, 0);
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      const double clearance = window.interior_clearance(accepted[i]);
      grid.visit_within(accepted[i], s_max, [&](std::size_t j, double d2) {
        if (j == i) return false;
        const double s = std::sqrt(d2);
        const auto it =
            std::upper_bound(bin_edges.begin(), bin_edges.end(), s);
        const auto b = static_cast<std::size_t>(it - bin_edges.begin()) - 1;
        if (b < n_bins && clearance >= bin_edges[b + 1]) ++counts[b];
        return false;
      });
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
      pair_counts[b] += counts[b];
      per_sample[b].push_back(static_cast<double>(counts[b]) /
                              (ref_volume[b] * shell[b]));
    }
  }

  BinnedCorrelation out;
  out.bin_edges = bin_edges;
  out.dimension = dim;
  out.n_samples = samples.size();
  out.pair_counts = pair_counts;
  out.estimates.resize(n_bins);
  out.standard_errors.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const auto ms = mean_se(per_sample[b]);
    out.estimates[b] = ms.mean;
    out.standard_errors[b] = ms.se;
  }
  const auto mi = mean_se(intensities);
  out.intensity = mi.mean;
  out.intensity_se = mi.se;
  return out;
}

CorrCEstimate estimate_C_corr(const BinnedCorrelation& corr) {
  CorrCEstimate out;
  out.intensity = corr.intensity;
  const double r1sq = corr.intensity * corr.intensity;
  double integral = 0.0;
  for (std::size_t b = 0; b < corr.n_bins(); ++b) {
    const double shell =
        shell_volume(corr.dimension, corr.bin_edges[b], corr.bin_edges[b + 1]);
    integral += (corr.estimates[b] - r1sq) * shell;
  }
  out.value = integral + corr.intensity;

  // Tail estimate past the last edge: exponential fit of |r2 - r1^2| on the
  // outer-half bins that stand clear of their error bars.
  std::vector<double> xs, ys;
  for (std::size_t b = corr.n_bins() / 2; b < corr.n_bins(); ++b) {
    const double gap = std::abs(corr.estimates[b] - r1sq);
    if (gap <= 2.0 * corr.standard_errors[b]) continue;
    xs.push_back(0.5 * (corr.bin_edges[b] + corr.bin_edges[b + 1]));
    ys.push_back(gap);
  }
  if (xs.size() >= 3) {
    try {
      const DecayFit fit = fit_exponential_decay(xs, ys);
      if (fit.rate > 0.0) {
        const double s0 = corr.bin_edges.back();
        const int d = corr.dimension;
        const double surface_unit = d * ball_volume(d, 1.0);
        out.truncation_error = adaptive_simpson(
            [&](double s) {
              return fit.amplitude * std::exp(-fit.rate * s) * surface_unit *
                     std::pow(s, d - 1);
            },
            s0, s0 + 60.0 / fit.rate, 1e-12);
      }
    } catch (const std::invalid_argument&) {
      // decay already at the noise floor: no measurable tail
    }
  }
  return out;
}

VarCEstimate estimate_C_var(const std::vector<double>& lambdas,
                            const std::vector<std::vector<double>>& counts,
                            int dimension, double box_volume) {
  if (lambdas.empty() || lambdas.size() != counts.size())
    throw std::invalid_argument("estimate_C_var: lambdas/counts mismatch");
  VarCEstimate out;
  out.lambdas = lambdas;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (counts[i].size() < 2)
      throw std::invalid_argument("estimate_C_var: need >= 2 replicates");
    const double scale = std::pow(lambdas[i], dimension) * box_volume;
    out.normalized_variance.push_back(sample_variance(counts[i]) / scale);
  }
  out.value = out.normalized_variance.back();
  return out;
}

MomentPrediction moments_from_correlations(const std::vector<double>& t_grid,
                                           const std::vector<double>& r1_of_t,
                                           const BinnedCorrelation& r2,
                                           const Region& region) {
  MomentPrediction out;
  if (region.empty()) return out;
  if (t_grid.size() != r1_of_t.size() || t_grid.size() < 2)
    throw std::invalid_argument("moments_from_correlations: bad r1 curve");

  // Spatial intensity: r1 integrated over the time grid (trapezoid).
  double rho1 = 0.0;
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    rho1 += 0.5 * (r1_of_t[i] + r1_of_t[i - 1]) * (t_grid[i] - t_grid[i - 1]);

  const double vol = region.volume();
  out.mean = rho1 * vol;

  if (region.boxes().size() != 1)
    throw std::invalid_argument(
        "moments_from_correlations: variance needs a single-box region");
  if (r2.bin_edges.front() != 0.0)
    throw std::invalid_argument(
        "moments_from_correlations: r2 bins must start at 0");
  const Box& box = region.boxes().front();
  const int d = region.dimension();

  const auto r2_at = [&](double s) {
    if (s >= r2.bin_edges.back()) return rho1 * rho1;  // factorized far field
    const auto it =
        std::upper_bound(r2.bin_edges.begin(), r2.bin_edges.end(), s);
    const auto b = static_cast<std::size_t>(it - r2.bin_edges.begin());
    return r2.estimates[b == 0 ? 0 : b - 1];
  };

  // int_{B x B} f(|x-y|) dx dy = int_{[-L,L]^d} f(|u|) prod (L_i - |u_i|) du
  std::vector<double> len(d);
  for (int i = 0; i < d; ++i) len[i] = box.hi[i] - box.lo[i];
  const int steps = d == 1 ? 4000 : (d == 2 ? 400 : 60);
  double integral = 0.0;
  std::vector<int> idx(d, 0);
  std::vector<double> du(d);
  for (int i = 0; i < d; ++i) du[i] = 2.0 * len[i] / steps;
  while (true) {
    double weight = 1.0;
    double s2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double u = -len[i] + (idx[i] + 0.5) * du[i];
      weight *= std::max(0.0, len[i] - std::abs(u)) * du[i];
      s2 += u * u;
    }
    if (weight > 0.0)
      integral += (r2_at(std::sqrt(s2)) - rho1 * rho1) * weight;
    int axis = d - 1;
    while (axis >= 0 && idx[axis] == steps - 1) idx[axis--] = 0;
    if (axis < 0) break;
    ++idx[axis];
  }
  out.variance = integral + rho1 * vol;
  return out;
}

ClusteringGapResult clustering_gap(const std::vector<SpaceTimePoint>& k_tuple,
                                   const std::vector<SpaceTimePoint>& l_tuple,
                                   const std::vector<double>& separations,
                                   const CellField& proto, int n_samples) {
  if (k_tuple.empty() || l_tuple.empty())
    throw std::invalid_argument("clustering_gap: tuples must be nonempty");
  if (k_tuple.size() > 2 || l_tuple.size() > 2)
    throw std::invalid_argument("clustering_gap: tuple sizes <= 2");
  if (n_samples < 2)
    throw std::invalid_argument("clustering_gap: n_samples >= 2");

  ClusteringGapResult out;
  for (const double sep : separations) {
    std::vector<SpaceTimePoint> shifted = l_tuple;
    for (auto& w : shifted) w.x[0] += sep;
    std::vector<SpaceTimePoint> joint = k_tuple;
    joint.insert(joint.end(), shifted.begin(), shifted.end());

    double sum_a = 0.0, sum_b = 0.0, sum_ab = 0.0;
    double saa = 0.0, sbb = 0.0, sabab = 0.0, sab_a = 0.0, sab_b = 0.0,
           sa_b = 0.0;
    std::uint64_t cone_hits = 0;
    for (int s = 0; s < n_samples; ++s) {
      const CellField field = sample_field(proto, static_cast<std::uint64_t>(s));
      const auto all_packed = [](const std::vector<std::uint8_t>& flags) {
        for (const auto f : flags)
          if (!f) return 0.0;
        return 1.0;
      };
      const double a = all_packed(sigma_joint(k_tuple, field));
      const double b = all_packed(sigma_joint(shifted, field));
      const double ab = all_packed(sigma_joint(joint, field));
      sum_a += a;
      sum_b += b;
      sum_ab += ab;
      saa += a * a;
      sbb += b * b;
      sabab += ab * ab;
      sab_a += ab * a;
      sab_b += ab * b;
      sa_b += a * b;

      // Backward-cone intersection of any cross pair (cones w.r.t. the bare
      // input), compared by field-point identity.
      std::set<std::uint64_t> seen;
      bool intersects = false;
      for (const auto& w : k_tuple) {
        const auto cone = causal_cone_infinite(w, field, ConeDirection::backward);
        for (const auto& m : cone.members)
          if (m.uid != 0) seen.insert(m.uid);
      }
      for (const auto& w : shifted) {
        if (intersects) break;
        const auto cone = causal_cone_infinite(w, field, ConeDirection::backward);
        for (const auto& m : cone.members)
          if (m.uid != 0 && seen.count(m.uid)) {
            intersects = true;
            break;
          }
      }
      cone_hits += intersects ? 1 : 0;
    }

    const double n = n_samples;
    const double ma = sum_a / n, mb = sum_b / n, mab = sum_ab / n;
    ClusteringGapPoint pt;
    pt.separation = sep;
    pt.rbar_joint = mab;
    pt.rbar_product = ma * mb;
    pt.gap = std::abs(mab - ma * mb);
    // Delta method for g = m_ab - m_a m_b with gradient (1, -m_b, -m_a).
    const double c_abab = sabab / n - mab * mab;
    const double c_aa = saa / n - ma * ma;
    const double c_bb = sbb / n - mb * mb;
    const double c_ab_a = sab_a / n - mab * ma;
    const double c_ab_b = sab_b / n - mab * mb;
    const double c_a_b = sa_b / n - ma * mb;
    const double var_g = c_abab + mb * mb * c_aa + ma * ma * c_bb -
                         2.0 * mb * c_ab_a - 2.0 * ma * c_ab_b +
                         2.0 * ma * mb * c_a_b;
    pt.gap_se = std::sqrt(std::max(0.0, var_g) / n);
    const double pc = static_cast<double>(cone_hits) / n;
    pt.cone_intersect_prob = pc;
    pt.cone_intersect_se = std::sqrt(pc * (1.0 - pc) / n);
    pt.below_noise_floor = pt.gap <= 2.0 * pt.gap_se;
    out.points.push_back(pt);
  }

  std::vector<double> gx, gy, cx, cy;
  for (const auto& pt : out.points) {
    if (!pt.below_noise_floor) {
      gx.push_back(pt.separation);
      gy.push_back(pt.gap);
    }
    if (pt.cone_intersect_prob > 0.0) {
      cx.push_back(pt.separation);
      cy.push_back(pt.cone_intersect_prob);
    }
  }
  if (gx.size() >= 3) {
    out.gap_fit = fit_exponential_decay(gx, gy);
    out.gap_fit_valid = true;
  }
  if (cx.size() >= 3) {
    out.cone_fit = fit_exponential_decay(cx, cy);
    out.cone_fit_valid = true;
  }
  return out;
}

}  // namespace rsalab
