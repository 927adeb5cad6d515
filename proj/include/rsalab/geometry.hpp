#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rsalab {

// Spatial location, length d. Units throughout are ball radii, so the
// interaction diameter of two balls is 2.
using Vec = std::vector<double>;

// Integer cell / lattice-site coordinates, length d.
using CellIndex = std::vector<std::int64_t>;

double squared_distance(const Vec& a, const Vec& b);
double distance(const Vec& a, const Vec& b);

// Lexicographic comparison used for deterministic tie-breaking.
bool lex_less(const Vec& a, const Vec& b);

// Axis-aligned box, half-open: lo[i] <= x[i] < hi[i]. Half-open semantics
// make disjoint tilings exact (a point belongs to exactly one tile).
struct Box {
  Vec lo;
  Vec hi;

  int dimension() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(const Vec& x) const;
  Box scaled(double factor) const;
  // Shrinks every side by `margin`; empty result if a side collapses.
  std::optional<Box> eroded(double margin) const;
  Box padded(double margin) const;
};

std::optional<Box> box_intersection(const Box& a, const Box& b);

// Finite union of axis-aligned boxes. Volume is exact (inclusion-exclusion
// over the box list), membership is exact, and scaling is exact, which is
// all the window experiments need.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Box> boxes);
  // Single-box convenience.
  Region(Vec lo, Vec hi);

  static Region cube(int dimension, double side, double center = 0.0);

  bool empty() const { return boxes_.empty(); }
  int dimension() const;
  const std::vector<Box>& boxes() const { return boxes_; }

  bool contains(const Vec& x) const;
  double volume() const;
  Region scaled(double factor) const;
  Region padded(double margin) const;
  // Union of the per-box erosions. A subset of the true erosion of the
  // union, with exactly computable volume; used for minus sampling.
  Region eroded(double margin) const;
  Box bounding_box() const;

  // Distance from an interior point to the region boundary. Exact for a
  // single box; for unions this is the largest single-box clearance, a
  // lower bound on the true clearance.
  double interior_clearance(const Vec& x) const;

 private:
  std::vector<Box> boxes_;
};

// Volume of the overlap of two box unions (inclusion-exclusion).
double region_intersection_volume(const Region& a, const Region& b);

// Cell decomposition used by the lazily generated fields: cell c covers
// [c*h, (c+1)*h) per axis.
CellIndex cell_of(const Vec& x, double cell_size);
Box cell_box(const CellIndex& cell, double cell_size);

// All cells whose box intersects the region (or the region padded by
// `margin`). Deduplicated, sorted lexicographically.
std::vector<CellIndex> cells_overlapping(const Region& region, double cell_size,
                                         double margin = 0.0);

// All lattice sites (integer points) inside the region.
std::vector<CellIndex> sites_in_region(const Region& region);

}  // namespace rsalab
