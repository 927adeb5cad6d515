#pragma once

#include <cstdint>
#include <vector>

#include "rsalab/field.hpp"
#include "rsalab/geometry.hpp"

namespace rsalab {

// Two balls of radius 1 overlap iff their centers are closer than 2.
// Open balls: contact at distance exactly 2 is not an overlap.
bool overlaps(const Vec& x1, const Vec& x2);

// Input arrivals with their acceptance flags. `accepted[i]` is the sigma
// value of points[i]; re-running the sequential rule on `points` reproduces
// the flags (for the basic packing dynamics).
struct PackedSample {
  std::vector<SpaceTimePoint> points;   // arrival order
  std::vector<std::uint8_t> accepted;   // parallel flags

  std::uint64_t field_seed = 0;
  FieldMode mode = FieldMode::continuum;
  double tau = 0.0;
  Region region;

  std::size_t size() const { return points.size(); }
  std::size_t accepted_count() const;
  std::vector<Vec> accepted_positions() const;
};

// Sequential acceptance: a point is accepted iff it overlaps no previously
// accepted point. Input must be in arrival order (throws otherwise).
PackedSample pack_sequential(std::vector<SpaceTimePoint> points);

// Acceptance flags only, for callers that manage their own point storage.
std::vector<std::uint8_t> pack_flags(const std::vector<SpaceTimePoint>& points);

// Reversible deposition sweep over explicit arrivals (lifetimes must be
// set): each accepted ball stays for its lifetime and then leaves, freeing
// the space. Flags mark balls adsorbed and still present at time tau.
std::vector<std::uint8_t> desorption_flags(
    const std::vector<SpaceTimePoint>& points, double tau);

// Field-level variant; lifetimes are drawn from the per-point substreams.
PackedSample simulate_desorption(const CellField& field, const Region& region,
                                 double lifetime_rate);

// Nucleation acceptance for radial growth: a seed is rejected iff it falls
// within distance initial_radius + speed * (elapsed time) of a previously
// accepted seed. initial_radius == 0 is the zero-radius nucleation model.
std::vector<std::uint8_t> birth_growth_flags(
    const std::vector<SpaceTimePoint>& points, double speed,
    double initial_radius, double tau);

PackedSample simulate_birth_growth(const CellField& field, const Region& region,
                                   double speed, double initial_radius);

// Subset of a sample with the given type label; flags preserved.
PackedSample filter_by_mark(const PackedSample& sample, int mark);

// True iff all flagged points are pairwise at distance >= 2.
bool is_hard_core(const std::vector<SpaceTimePoint>& points,
                  const std::vector<std::uint8_t>& flags);

}  // namespace rsalab
