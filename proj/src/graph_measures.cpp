#include "rsalab/graph_measures.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "rsalab/grid_index.hpp"
#include "rsalab/rng.hpp"

namespace rsalab {

namespace {

// Index of the nearest neighbor of points[i]; ties resolved toward the
// lexicographically smallest neighbor position.
std::size_t nearest_neighbor_of(const std::vector<Vec>& points,
                                const GridIndex& grid, std::size_t i,
                                double start_radius) {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best = points.size();
  double radius = start_radius;
  while (true) {
    grid.visit_within(points[i], radius, [&](std::size_t j, double d2) {
      if (j == i) return false;
      if (d2 < best_d2 ||
          (d2 == best_d2 && best < points.size() &&
           lex_less(points[j], points[best]))) {
        best_d2 = d2;
        best = j;
      }
      return false;
    });
    // Every point strictly inside `radius` has been seen; the candidate is
    // final once it beats the unexplored distance.
    if (best < points.size() && std::sqrt(best_d2) < radius) return best;
    radius *= 2.0;
    if (!std::isfinite(radius))
      throw std::logic_error("nearest_neighbor_of: search diverged");
  }
}

}  // namespace

NNGraph build_nn_graph(const std::vector<Vec>& points) {
  NNGraph g;
  g.weights.assign(points.size(), 0.0);
  if (points.size() < 2) return g;

  const int dim = static_cast<int>(points.front().size());
  // Cell size near the typical spacing keeps bucket scans short.
  Box bb{points.front(), points.front()};
  for (const auto& p : points)
    for (int k = 0; k < dim; ++k) {
      bb.lo[k] = std::min(bb.lo[k], p[k]);
      bb.hi[k] = std::max(bb.hi[k], p[k]);
    }
  double extent = 0.0;
  for (int k = 0; k < dim; ++k) bb.hi[k] += 1e-9;
  for (int k = 0; k < dim; ++k) extent = std::max(extent, bb.hi[k] - bb.lo[k]);
  const double spacing = std::max(
      1e-6, extent / std::max(1.0, std::pow(static_cast<double>(points.size()),
                                            1.0 / dim)));
  GridIndex grid(dim, spacing);
  for (std::size_t i = 0; i < points.size(); ++i) grid.insert(i, points[i]);

  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t j = nearest_neighbor_of(points, grid, i, 2.0 * spacing);
    edge_set.insert({std::min(i, j), std::max(i, j)});
  }
  for (const auto& [i, j] : edge_set) {
    const double len = distance(points[i], points[j]);
    g.edges.emplace_back(i, j);
    g.weights[i] += 0.5 * len;
    g.weights[j] += 0.5 * len;
    g.total_edge_length += len;
  }
  return g;
}

double nn_measure(const std::vector<Vec>& points, const Region& query) {
  if (points.size() < 2) {
    std::cerr << "nn_measure: fewer than two points, measure is zero\n";
    return 0.0;
  }
  const NNGraph g = build_nn_graph(points);
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (query.contains(points[i])) total += g.weights[i];
  return total;
}

RescaledVectorSample nn_rescaled_sample(const CellField& field,
                                        SampleMode mode, double lambda,
                                        const std::vector<Region>& boxes,
                                        const std::optional<Region>& A,
                                        double margin) {
  if (field.mode != FieldMode::continuum)
    throw std::invalid_argument("nn_rescaled_sample: continuum fields only");
  if (!(lambda > 0.0))
    throw std::invalid_argument("nn_rescaled_sample: lambda > 0");
  if (boxes.empty()) throw std::invalid_argument("nn_rescaled_sample: no boxes");
  if (mode == SampleMode::finite_volume && !A.has_value())
    throw std::invalid_argument("nn_rescaled_sample: finite mode requires A");

  std::vector<Region> scaled;
  for (const auto& b : boxes) scaled.push_back(b.scaled(lambda));

  Region window;
  if (mode == SampleMode::infinite_volume) {
    std::vector<Box> all;
    for (const auto& r : scaled)
      for (const auto& b : r.boxes()) all.push_back(b.padded(margin));
    window = Region(std::move(all));
  } else {
    window = A->scaled(lambda);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const double v = scaled[i].volume();
      if (region_intersection_volume(scaled[i], window) < v * (1.0 - 1e-9))
        throw std::invalid_argument(
            "nn_rescaled_sample: box outside A in finite-volume mode");
    }
  }

  std::vector<Vec> pts;
  for (const auto& p : sample_window(field, window)) pts.push_back(p.x);

  RescaledVectorSample out;
  out.lambda = lambda;
  out.mode = mode;
  out.replicate_seed = field.master_seed;
  out.boxes = boxes;
  out.dimension = field.dimension;
  out.raw.assign(boxes.size(), 0.0);
  if (pts.size() >= 2) {
    const NNGraph g = build_nn_graph(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t b = 0; b < scaled.size(); ++b)
        if (scaled[b].contains(pts[i])) out.raw[b] += g.weights[i];
    }
  }
  return out;
}

StabilizationConfig default_stabilization_config() {
  StabilizationConfig cfg;
  for (double r = 1.0; r <= 8.0 + 1e-9; r += 0.5) cfg.r_grid.push_back(r);
  return cfg;
}

namespace {

// Weights inside B_R (plus the inserted origin's own weight) of the add-one
// difference: nn weights with the origin minus nn weights without it.
// Keys are indices into `base`; the origin itself is keyed by SIZE_MAX so
// baselines of different configuration sizes stay comparable.
std::map<std::size_t, double> add_one_difference(const std::vector<Vec>& base,
                                                 double r_ball) {
  const int dim = base.empty() ? 1 : static_cast<int>(base.front().size());
  const Vec origin(dim, 0.0);
  std::vector<Vec> with = base;
  with.push_back(origin);

  const NNGraph g_with = build_nn_graph(with);
  const NNGraph g_without = build_nn_graph(base);

  std::map<std::size_t, double> diff;
  const double r2 = r_ball * r_ball;
  for (std::size_t i = 0; i < base.size(); ++i) {
    double d2 = 0.0;
    for (int k = 0; k < dim; ++k) d2 += base[i][k] * base[i][k];
    if (d2 > r2) continue;
    const double w0 = base.size() >= 2 ? g_without.weights[i] : 0.0;
    const double delta = g_with.weights[i] - w0;
    if (delta != 0.0) diff[i] = delta;
  }
  if (!g_with.weights.empty() && g_with.weights.back() != 0.0)
    diff[static_cast<std::size_t>(-1)] = g_with.weights.back();
  return diff;
}

}  // namespace

double stabilization_radius_probe(const CellField& field,
                                  const StabilizationConfig& config) {
  if (config.r_grid.empty())
    throw std::invalid_argument("stabilization_radius_probe: empty r grid");
  const int dim = field.dimension;
  const double r_max = config.r_grid.back();
  const double w = r_max + config.adversary_span + config.window_margin;
  const Region window = Region::cube(dim, 2.0 * w);

  std::vector<Vec> env;
  for (const auto& p : sample_window(field, window)) env.push_back(p.x);
  return stabilization_radius_for(env, config);
}

double stabilization_radius_for(const std::vector<Vec>& env,
                                const StabilizationConfig& config) {
  if (config.r_grid.empty())
    throw std::invalid_argument("stabilization_radius_for: empty r grid");
  const int dim = env.empty() ? 1 : static_cast<int>(env.front().size());

  for (const double r : config.r_grid) {
    // Configuration clipped to B_r.
    std::vector<Vec> clipped;
    for (const auto& p : env) {
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) d2 += p[k] * p[k];
      if (d2 <= r * r) clipped.push_back(p);
    }
    const auto baseline = add_one_difference(clipped, r);

    // Adversarial insertions on an axis-and-diagonal grid in the annulus
    // (r, r + span].
    bool invariant = true;
    std::vector<Vec> directions;
    for (int k = 0; k < dim && invariant; ++k) {
      for (const double sign : {-1.0, 1.0}) {
        Vec u(dim, 0.0);
        u[k] = sign;
        directions.push_back(u);
      }
    }
    if (dim >= 2) {
      Vec u(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
      directions.push_back(u);
      for (auto& v : u) v = -v;
      directions.push_back(u);
    }
    for (const auto& u : directions) {
      if (!invariant) break;
      for (double rho = r + config.adversary_spacing;
           rho <= r + config.adversary_span + 1e-9;
           rho += config.adversary_spacing) {
        Vec a(dim);
        for (int k = 0; k < dim; ++k) a[k] = rho * u[k];
        std::vector<Vec> perturbed = clipped;
        perturbed.push_back(a);
        if (add_one_difference(perturbed, r) != baseline) {
          invariant = false;
          break;
        }
      }
    }
    if (invariant) return r;
  }
  return std::numeric_limits<double>::infinity();  // censored
}

StabilizationTail stabilization_tail(const CellField& proto, int n_probes,
                                     const StabilizationConfig& config,
                                     const std::vector<double>& t_grid) {
  StabilizationTail out;
  out.t_grid = t_grid;
  for (int s = 0; s < n_probes; ++s) {
    const CellField field = sample_field(proto, static_cast<std::uint64_t>(s));
    const double r = stabilization_radius_probe(field, config);
    out.radii.push_back(r);
    if (!std::isfinite(r)) ++out.n_censored;
  }
  for (const double t : t_grid) {
    std::uint64_t hits = 0;
    for (const double r : out.radii)
      if (r > t) ++hits;
    const double p = static_cast<double>(hits) / out.radii.size();
    out.tail_probability.push_back(p);
    out.tail_se.push_back(std::sqrt(p * (1.0 - p) / out.radii.size()));
  }
  return out;
}

}  // namespace rsalab
