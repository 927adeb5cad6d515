#pragma once

#include <cstdint>
#include <vector>

#include "rsalab/errors.hpp"
#include "rsalab/field.hpp"
#include "rsalab/geometry.hpp"
#include "rsalab/packing.hpp"

namespace rsalab {

// Oriented interaction graph on a finite point list: edge i -> j whenever
// ||x_i - x_j|| <= 2 and t_i <= t_j (i != j). Note the graph uses <= 2
// while packing blocks at < 2; the graph is a conservative superset of the
// influence relation.
struct CausalGraph {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::vector<std::size_t>> in;
};

CausalGraph build_causal_graph(const std::vector<SpaceTimePoint>& points);

enum class ConeDirection { backward, forward, both };

struct CausalCone {
  SpaceTimePoint root;
  std::vector<SpaceTimePoint> members;  // includes root, arrival-sorted
  ConeDirection direction = ConeDirection::backward;
  double spatial_radius = 0.0;  // max ||x_member - x_root||
  double time_extent = 0.0;     // max |t_member - t_root|
};

// Cones within a finite point list. `w` may be one of the points or an
// inserted test point.
CausalCone backward_cone(const SpaceTimePoint& w,
                         const std::vector<SpaceTimePoint>& points);
CausalCone forward_cone(const SpaceTimePoint& w,
                        const std::vector<SpaceTimePoint>& points);

// Hard cap on lazy exploration, in cells from the query origin.
std::int64_t exploration_cap_cells(const CellField& field);

// Exact infinite-volume acceptance of an inserted test point: equals the
// sigma value of w in the packing of the full process P union {w}. Decided
// lazily: the acceptance recursion explores exactly the part of w's
// backward cone that can influence the decision, generating cells on
// demand. Throws ConeCapError past the exploration cap.
bool sigma_infinite(const SpaceTimePoint& w, const CellField& field);

// Joint acceptance of several inserted test points: sigma(w_i, P union
// {w_1..w_k}), so earlier accepted test points block later ones.
std::vector<std::uint8_t> sigma_joint(const std::vector<SpaceTimePoint>& tests,
                                      const CellField& field);

// Earliest time at which a ball centered at x would be blocked: the minimum
// arrival time of an accepted field point within distance 2 of x (on the
// lattice, also the site's own first arrival). An inserted test point at
// (x, t) is accepted iff t <= the returned value. +infinity if nothing
// blocks by t_max.
double first_blocking_time(const CellField& field, const Vec& x, double t_max);

// Restriction to `region` of the infinite-volume packing: every field point
// with x in region, flagged exactly as in the infinite process. Explores
// cells in expanding margins until no in-window backward cone can reach
// unexplored territory, then packs the explored sample once.
PackedSample pack_window_infinite(const CellField& field, const Region& region);

// Exact causal cone of an inserted test point w with respect to the
// infinite continuum process, materialized by demand-driven expansion.
CausalCone causal_cone_infinite(const SpaceTimePoint& w, const CellField& field,
                                ConeDirection direction);

// --- lattice jamming -------------------------------------------------------

// Random-priority jamming on an explicit site list (free boundary): a site
// is accepted iff every listed neighbor within distance < 2 with an earlier
// first arrival is rejected. Flags parallel `sites`.
std::vector<std::uint8_t> jam_priority_flags(
    const std::vector<CellIndex>& sites, const std::vector<double>& arrivals);

// Infinite-input jamming decision for one site, decided exactly by lazy
// expansion of the priority-ordered dependency cone.
bool lattice_site_jammed(const CellField& field, const CellIndex& site);

// Accepted sites of the infinite-input jamming restricted to a window
// (no boundary effects), sorted lexicographically.
std::vector<CellIndex> jam_lattice_window(const CellField& field,
                                          const Region& window);

// Integer offsets z != 0 with ||z|| < 2 (the lattice exclusion
// neighborhood; 2 sites in d=1, 8 in d=2, 26 in d=3).
std::vector<CellIndex> lattice_neighbor_offsets(int dimension);

}  // namespace rsalab
