#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rsalab/geometry.hpp"
#include "rsalab/rng.hpp"

namespace rsalab {

struct CellIndexHash {
  std::size_t operator()(const CellIndex& c) const {
    std::uint64_t h = 0x243f6a8885a308d3ull;
    for (const auto v : c) h = chain(h, static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

// Uniform hash grid over spatial points for fixed-radius neighbor queries.
// Coordinates are stored flattened per bucket so query loops stay cache
// friendly even when Vec lives on the heap.
class GridIndex {
 public:
  GridIndex(int dimension, double cell_size)
      : dim_(dimension), h_(cell_size) {}

  void insert(std::size_t id, const Vec& x) {
    auto& bucket = buckets_[cell_of(x, h_)];
    bucket.ids.push_back(id);
    bucket.coords.insert(bucket.coords.end(), x.begin(), x.end());
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [_, b] : buckets_) n += b.ids.size();
    return n;
  }

  // Visits every stored id with ||x_id - x|| < radius (strict). The visitor
  // may return true to stop early; returns whether a visitor stopped.
  template <class F>
  bool visit_within(const Vec& x, double radius, F&& visit) const {
    const double r2 = radius * radius;
    const auto reach = static_cast<std::int64_t>(std::ceil(radius / h_));
    const CellIndex center = cell_of(x, h_);
    CellIndex probe(dim_);
    return visit_cells(center, probe, 0, reach, [&](const CellIndex& cell) {
      const auto it = buckets_.find(cell);
      if (it == buckets_.end()) return false;
      const auto& b = it->second;
      for (std::size_t k = 0; k < b.ids.size(); ++k) {
        double d2 = 0.0;
        const double* p = &b.coords[k * dim_];
        for (int i = 0; i < dim_; ++i) {
          const double d = p[i] - x[i];
          d2 += d * d;
        }
        if (d2 < r2 && visit(b.ids[k], d2)) return true;
      }
      return false;
    });
  }

  bool any_within(const Vec& x, double radius) const {
    return visit_within(x, radius, [](std::size_t, double) { return true; });
  }

 private:
  struct Bucket {
    std::vector<std::size_t> ids;
    std::vector<double> coords;
  };

  template <class F>
  bool visit_cells(const CellIndex& center, CellIndex& probe, int axis,
                   std::int64_t reach, F&& f) const {
    if (axis == dim_) return f(probe);
    for (std::int64_t d = -reach; d <= reach; ++d) {
      probe[axis] = center[axis] + d;
      if (visit_cells(center, probe, axis + 1, reach, f)) return true;
    }
    return false;
  }

  int dim_;
  double h_;
  std::unordered_map<CellIndex, Bucket, CellIndexHash> buckets_;
};

}  // namespace rsalab
