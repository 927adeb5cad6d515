#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsalab/field.hpp"
#include "rsalab/geometry.hpp"
#include "rsalab/limits.hpp"

namespace rsalab {

// Undirected nearest-neighbor graph: the union of every point's edge to its
// nearest neighbor (equidistant ties broken toward the lexicographically
// smallest neighbor). Each vertex carries half the total length of its
// incident edges, so the weights sum to the total edge length exactly.
struct NNGraph {
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j
  std::vector<double> weights;
  double total_edge_length = 0.0;
};

NNGraph build_nn_graph(const std::vector<Vec>& points);

// Weight mass of the nearest-neighbor measure inside `query`. Fewer than
// two points carry no edges: returns 0 with a warning on stderr.
double nn_measure(const std::vector<Vec>& points, const Region& query);

// Rescaled nearest-neighbor edge-length measure of a spatial Poisson sample
// (the projection of the field's arrivals; intensity = tau). Infinite mode
// pads the window so that edges crossing the box family are unaffected by
// the truncation (exponential stabilization makes the residual error
// negligible at the default margin); finite mode builds the graph on
// lambda*A only.
RescaledVectorSample nn_rescaled_sample(const CellField& field,
                                        SampleMode mode, double lambda,
                                        const std::vector<Region>& boxes,
                                        const std::optional<Region>& A = {},
                                        double margin = 8.0);

struct StabilizationConfig {
  std::vector<double> r_grid;        // candidate radii, ascending
  double adversary_spacing = 0.5;    // insertion grid resolution
  double adversary_span = 4.0;       // how far past R insertions are tried
  double window_margin = 6.0;        // sampled environment past max R
};

StabilizationConfig default_stabilization_config();

// Smallest tested radius R such that no adversarial insertion outside B_R
// changes the add-one difference of the NN measure restricted to B_R
// (difference between the measures with and without a point at the
// origin). Returns +infinity when even the largest tested radius fails
// (censored).
double stabilization_radius_probe(const CellField& field,
                                  const StabilizationConfig& config);

// Same probe on an explicit environment (origin-centered coordinates).
double stabilization_radius_for(const std::vector<Vec>& environment,
                                const StabilizationConfig& config);

struct StabilizationTail {
  std::vector<double> radii;       // per-probe estimates (censored = +inf)
  std::vector<double> t_grid;
  std::vector<double> tail_probability;  // P[R > t]
  std::vector<double> tail_se;
  std::size_t n_censored = 0;
};

StabilizationTail stabilization_tail(const CellField& proto, int n_probes,
                                     const StabilizationConfig& config,
                                     const std::vector<double>& t_grid);

}  // namespace rsalab
