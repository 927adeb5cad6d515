#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rsalab/geometry.hpp"

namespace rsalab {

// A particle arrival: spatial center plus arrival time. mark and lifetime
// are filled only by the model variants that use them. uid identifies the
// point's deterministic substream (derived from its cell and in-cell rank),
// so marks and lifetimes stay coupled across experiments that share a field.
struct SpaceTimePoint {
  Vec x;
  double t = 0.0;
  std::optional<int> mark;
  std::optional<double> lifetime;
  std::uint64_t uid = 0;
};

// Global arrival order: time ascending, ties broken lexicographically by
// coordinates. Ties have probability zero under Poisson input, but the rule
// keeps every pipeline deterministic on constructed fixtures.
bool arrival_less(const SpaceTimePoint& a, const SpaceTimePoint& b);
bool arrival_sorted(const std::vector<SpaceTimePoint>& pts);

enum class FieldMode { continuum, lattice };

constexpr double kUnboundedTime = std::numeric_limits<double>::infinity();

// Deterministic, lazily generated unit-rate Poisson input. Continuum mode
// realizes a rate-one space-time process on R^d x [0,tau] cell by cell;
// lattice mode realizes independent unit-rate arrival clocks on Z^d sites.
// Querying is pure: the same (field, cell) always yields the same points,
// in any order, from any thread.
struct CellField {
  std::uint64_t master_seed = 0;
  int dimension = 1;
  FieldMode mode = FieldMode::continuum;
  double tau = 1.0;        // kUnboundedTime in lattice mode
  double cell_size = 2.0;  // >= interaction diameter
  std::int64_t cap_cells = 0;  // lazy-exploration cap override; 0 = default

  // Derived stream with the same geometry; used for replicate seeding.
  CellField with_seed(std::uint64_t seed) const {
    CellField f = *this;
    f.master_seed = seed;
    return f;
  }
};

CellField make_field(std::uint64_t master_seed, int dimension, FieldMode mode,
                     double tau, double cell_size = 2.0);

// Points of one cell, sorted by arrival order. Continuum mode only.
std::vector<SpaceTimePoint> cell_points(const CellField& field,
                                        const CellIndex& cell);

// All field points with x in `region`, globally sorted by arrival order.
std::vector<SpaceTimePoint> sample_window(const CellField& field,
                                          const Region& region);

// Arrival times of one lattice site on [0, horizon], ascending. Extending
// the horizon extends the list without changing the prefix.
std::vector<double> lattice_arrivals(const CellField& field,
                                     const CellIndex& site, double horizon);

// First arrival time of a lattice site (the site's priority).
double first_arrival(const CellField& field, const CellIndex& site);

// Deterministic per-point type label in {0, ..., n_types-1}.
int point_mark(const SpaceTimePoint& p, int n_types);
void assign_marks(std::vector<SpaceTimePoint>& pts, int n_types);

// Deterministic per-point exponential lifetime; +infinity when rate == 0.
double point_lifetime(const SpaceTimePoint& p, double rate);

std::string to_string(FieldMode mode);

}  // namespace rsalab
