#include "rsalab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsalab/causal.hpp"
#include "rsalab/packing.hpp"
#include "rsalab/rng.hpp"

namespace rsalab {

std::string to_string(SampleMode mode) {
  return mode == SampleMode::infinite_volume ? "infinite" : "finite";
}

namespace {

std::int64_t chebyshev_norm(const CellIndex& c) {
  std::int64_t m = 0;
  for (const auto v : c) m = std::max(m, std::abs(v));
  return m;
}

Region union_region(const std::vector<Region>& regions) {
  std::vector<Box> all;
  for (const auto& r : regions)
    for (const auto& b : r.boxes()) all.push_back(b);
  return Region(std::move(all));
}

void check_boxes_inside(const std::vector<Region>& boxes, const Region& domain,
                        double lambda) {
  for (const auto& b : boxes) {
    const Region scaled = b.scaled(lambda);
    const double v = scaled.volume();
    if (region_intersection_volume(scaled, domain) < v * (1.0 - 1e-9))
      throw std::invalid_argument(
          "rescaled_sample: box outside A in finite-volume mode");
  }
}

}  // namespace

RescaledVectorSample rescaled_sample(const CellField& field, SampleMode mode,
                                     double lambda,
                                     const std::vector<Region>& boxes,
                                     const std::optional<Region>& A) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("rescaled_sample: lambda > 0");
  if (boxes.empty())
    throw std::invalid_argument("rescaled_sample: no boxes");
  if (mode == SampleMode::finite_volume && !A.has_value())
    throw std::invalid_argument("rescaled_sample: finite mode requires A");

  RescaledVectorSample out;
  out.lambda = lambda;
  out.mode = mode;
  out.replicate_seed = field.master_seed;
  out.boxes = boxes;
  out.dimension = field.dimension;
  out.raw.assign(boxes.size(), 0.0);

  std::vector<Region> scaled;
  scaled.reserve(boxes.size());
  for (const auto& b : boxes) scaled.push_back(b.scaled(lambda));

  if (field.mode == FieldMode::continuum) {
    if (mode == SampleMode::infinite_volume) {
      const PackedSample sample =
          pack_window_infinite(field, union_region(scaled));
      for (std::size_t i = 0; i < sample.points.size(); ++i) {
        if (!sample.accepted[i]) continue;
        for (std::size_t b = 0; b < scaled.size(); ++b)
          if (scaled[b].contains(sample.points[i].x)) out.raw[b] += 1.0;
      }
    } else {
      const Region domain = A->scaled(lambda);
      check_boxes_inside(boxes, domain, lambda);
      auto pts = sample_window(field, domain);
      const auto flags = pack_flags(pts);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!flags[i]) continue;
        for (std::size_t b = 0; b < scaled.size(); ++b)
          if (scaled[b].contains(pts[i].x)) out.raw[b] += 1.0;
      }
    }
    return out;
  }

  // Lattice: jammed-site counts. Infinite mode decides each site against
  // the full lattice; finite mode confines the dynamics to lambda*A.
  if (mode == SampleMode::infinite_volume) {
    for (std::size_t b = 0; b < scaled.size(); ++b)
      out.raw[b] = static_cast<double>(
          jam_lattice_window(field, scaled[b]).size());
  } else {
    const Region domain = A->scaled(lambda);
    check_boxes_inside(boxes, domain, lambda);
    const auto sites = sites_in_region(domain);
    std::vector<double> arrivals(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i)
      arrivals[i] = first_arrival(field, sites[i]);
    const auto flags = jam_priority_flags(sites, arrivals);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (!flags[i]) continue;
      Vec x(sites[i].size());
      for (std::size_t k = 0; k < x.size(); ++k)
        x[k] = static_cast<double>(sites[i][k]);
      for (std::size_t b = 0; b < scaled.size(); ++b)
        if (scaled[b].contains(x)) out.raw[b] += 1.0;
    }
  }
  return out;
}

void center_samples(std::vector<RescaledVectorSample>& samples) {
  if (samples.empty()) return;
  const std::size_t m = samples.front().raw.size();
  const double lambda = samples.front().lambda;
  const int d = samples.front().dimension;
  std::vector<double> mean(m, 0.0);
  for (const auto& s : samples) {
    if (s.raw.size() != m || s.lambda != lambda)
      throw std::invalid_argument("center_samples: inhomogeneous replicates");
    for (std::size_t b = 0; b < m; ++b) mean[b] += s.raw[b];
  }
  for (auto& v : mean) v /= static_cast<double>(samples.size());
  const double scale = std::pow(lambda, d / 2.0);
  for (auto& s : samples) {
    s.mean_estimate = mean;
    s.centered_scaled.resize(m);
    for (std::size_t b = 0; b < m; ++b)
      s.centered_scaled[b] = (s.raw[b] - mean[b]) / scale;
  }
}

namespace {

GaussianityReport report_from_matrix(
    const std::vector<std::vector<double>>& by_box,
    const std::vector<Region>& boxes, double lambda, double c_estimate,
    std::size_t n) {
  const std::size_t m = by_box.size();
  GaussianityReport rep;
  rep.lambda = lambda;
  rep.c_estimate = c_estimate;
  rep.n_replicates = n;
  rep.per_box.resize(m);
  for (std::size_t b = 0; b < m; ++b) {
    auto& st = rep.per_box[b];
    st.variance = sample_variance(by_box[b]);
    if (st.variance <= 0.0)
      throw std::invalid_argument("gaussianity_report: degenerate box");
    st.skewness = sample_skewness(by_box[b]);
    st.excess_kurtosis = sample_excess_kurtosis(by_box[b]);
    st.ks_p = lilliefors_p_value(by_box[b]);
    st.ad_p = anderson_darling_normal(by_box[b]).p_value;
  }

  rep.empirical_cov.assign(m, std::vector<double>(m, 0.0));
  rep.empirical_cov_se.assign(m, std::vector<double>(m, 0.0));
  rep.predicted_cov.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      rep.empirical_cov[i][j] = sample_covariance(by_box[i], by_box[j]);
      rep.empirical_cov_se[i][j] = covariance_se(by_box[i], by_box[j]);
      rep.predicted_cov[i][j] =
          c_estimate * region_intersection_volume(boxes[i], boxes[j]);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double pred = rep.predicted_cov[i][j];
      const double emp = rep.empirical_cov[i][j];
      if (pred != 0.0) {
        rep.max_rel_deviation =
            std::max(rep.max_rel_deviation, std::abs(emp - pred) / std::abs(pred));
      } else if (rep.empirical_cov_se[i][j] > 0.0) {
        rep.zero_pred_max_z = std::max(
            rep.zero_pred_max_z, std::abs(emp) / rep.empirical_cov_se[i][j]);
      }
    }
  }
  return rep;
}

}  // namespace

GaussianityReport gaussianity_report(
    const std::vector<RescaledVectorSample>& samples, double c_estimate) {
  if (samples.size() < 200)
    throw std::invalid_argument("gaussianity_report: need >= 200 replicates");
  const std::size_t m = samples.front().raw.size();
  for (const auto& s : samples)
    if (s.centered_scaled.size() != m)
      throw std::invalid_argument(
          "gaussianity_report: samples must be centered first");
  std::vector<std::vector<double>> by_box(m);
  for (const auto& s : samples)
    for (std::size_t b = 0; b < m; ++b)
      by_box[b].push_back(s.centered_scaled[b]);
  return report_from_matrix(by_box, samples.front().boxes,
                            samples.front().lambda, c_estimate,
                            samples.size());
}

GaussianityReport gaussianity_report_from_vectors(
    const std::vector<std::vector<double>>& vectors,
    const std::vector<Region>& boxes, double lambda, double c_estimate) {
  if (vectors.size() < 200)
    throw std::invalid_argument("gaussianity_report: need >= 200 replicates");
  const std::size_t m = vectors.front().size();
  std::vector<std::vector<double>> by_box(m);
  for (const auto& v : vectors)
    for (std::size_t b = 0; b < m; ++b) by_box[b].push_back(v[b]);
  return report_from_matrix(by_box, boxes, lambda, c_estimate, vectors.size());
}

BoundaryDiff boundary_processes(const CellField& field, double lambda,
                                const Region& A) {
  if (field.mode != FieldMode::continuum)
    throw std::invalid_argument("boundary_processes: continuum mode only");
  const Region window = A.scaled(lambda);

  auto pts = sample_window(field, window);
  const auto finite_flags = pack_flags(pts);
  const PackedSample infinite = pack_window_infinite(field, window);
  if (infinite.points.size() != pts.size())
    throw std::logic_error("boundary_processes: coupling mismatch");

  BoundaryDiff out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool fin = finite_flags[i] != 0;
    const bool inf = infinite.accepted[i] != 0;
    if (fin == inf) continue;
    const double clearance = window.interior_clearance(pts[i].x);
    if (fin) {
      out.plus_points.push_back(pts[i]);
      out.plus_boundary_distance.push_back(clearance);
    } else {
      out.minus_points.push_back(pts[i]);
      out.minus_boundary_distance.push_back(clearance);
    }
  }
  return out;
}

namespace {

ScalingFit fit_log_log(const std::vector<double>& lambdas,
                       const std::vector<double>& values) {
  ScalingFit out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (values[i] <= 0.0) continue;
    out.log_lambda.push_back(std::log(lambdas[i]));
    out.log_statistic.push_back(std::log(values[i]));
  }
  if (out.log_lambda.size() < 2) return out;
  const LinearFit lf = linear_fit(out.log_lambda, out.log_statistic);
  out.slope = lf.slope;
  out.intercept = lf.intercept;
  out.r_squared = lf.r_squared;
  return out;
}

}  // namespace

BoundaryScaling boundary_scaling(const CellField& proto,
                                 const std::vector<double>& lambdas,
                                 const Region& A, int replicates) {
  if (lambdas.size() < 3)
    throw std::invalid_argument("boundary_scaling: need >= 3 lambdas");
  if (replicates < 2)
    throw std::invalid_argument("boundary_scaling: need >= 2 replicates");

  BoundaryScaling out;
  out.lambdas = lambdas;
  for (const double lambda : lambdas) {
    std::vector<double> plus, minus;
    for (int r = 0; r < replicates; ++r) {
      const CellField field =
          sample_field(proto, static_cast<std::uint64_t>(r));
      const BoundaryDiff diff = boundary_processes(field, lambda, A);
      plus.push_back(static_cast<double>(diff.plus_count()));
      minus.push_back(static_cast<double>(diff.minus_count()));
    }
    out.mean_plus.push_back(mean_se(plus).mean);
    out.var_plus.push_back(sample_variance(plus));
    out.mean_minus.push_back(mean_se(minus).mean);
    out.var_minus.push_back(sample_variance(minus));
    if (out.mean_plus.back() == 0.0 || out.mean_minus.back() == 0.0)
      out.dropped_lambdas.push_back(lambda);
  }
  out.mean_plus_fit = fit_log_log(lambdas, out.mean_plus);
  out.var_plus_fit = fit_log_log(lambdas, out.var_plus);
  out.mean_minus_fit = fit_log_log(lambdas, out.mean_minus);
  out.var_minus_fit = fit_log_log(lambdas, out.var_minus);
  return out;
}

ConeTailResult cone_tail(const CellField& proto,
                         const std::vector<double>& r_grid, double beta,
                         int n_samples) {
  if (!(beta > 0.0)) throw std::invalid_argument("cone_tail: beta > 0");
  if (r_grid.empty()) throw std::invalid_argument("cone_tail: empty R grid");
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (!(r_grid[i] > r_grid[i - 1]))
      throw std::invalid_argument("cone_tail: R grid must ascend");
  if (proto.mode != FieldMode::continuum)
    throw std::invalid_argument("cone_tail: continuum mode only");

  ConeTailResult out;
  out.r_grid = r_grid;
  out.n_samples = static_cast<std::size_t>(n_samples);
  out.escape_counts.assign(r_grid.size(), 0);

  for (int s = 0; s < n_samples; ++s) {
    const CellField field = sample_field(proto, static_cast<std::uint64_t>(s));
    // Deterministic root: the earliest arrival in the cell at the origin,
    // scanning outward over cell shells if that cell happens to be empty.
    SpaceTimePoint root;
    bool found = false;
    for (std::int64_t shell = 0; shell < 50 && !found; ++shell) {
      // d-cube shell enumeration in lexicographic order
      std::vector<CellIndex> cells;
      CellIndex probe(field.dimension, -shell);
      while (true) {
        if (chebyshev_norm(probe) == shell) cells.push_back(probe);
        int axis = field.dimension - 1;
        while (axis >= 0 && probe[axis] == shell) probe[axis--] = -shell;
        if (axis < 0) break;
        ++probe[axis];
      }
      for (const auto& cell : cells) {
        const auto pts = cell_points(field, cell);
        if (pts.empty()) continue;
        if (!found || arrival_less(pts.front(), root)) {
          root = pts.front();
          found = true;
        }
      }
    }
    if (!found) continue;  // astronomically unlikely

    const CausalCone cone =
        causal_cone_infinite(root, field, ConeDirection::both);
    // Largest violation margin over members; the cone escapes C_R exactly
    // when this exceeds R.
    double worst = 0.0;
    for (const auto& m : cone.members) {
      const double excess =
          distance(m.x, root.x) - beta * std::abs(m.t - root.t);
      worst = std::max(worst, excess);
    }
    for (std::size_t i = 0; i < r_grid.size(); ++i)
      if (worst > r_grid[i]) ++out.escape_counts[i];
  }

  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double p = static_cast<double>(out.escape_counts[i]) / n_samples;
    out.escape_probability.push_back(p);
    out.escape_se.push_back(std::sqrt(p * (1.0 - p) / n_samples));
    out.censored.push_back(out.escape_counts[i] == 0 ? 1 : 0);
    if (out.escape_counts[i] > 0) {
      fx.push_back(r_grid[i]);
      fy.push_back(p);
    }
  }
  if (fx.size() >= 3) {
    out.fit = fit_exponential_decay(fx, fy);
    out.fit_valid = true;
  }
  return out;
}

}  // namespace rsalab
