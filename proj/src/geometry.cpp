#include "rsalab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rsalab {

double squared_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("squared_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(const Vec& a, const Vec& b) {
  return std::sqrt(squared_distance(a, b));
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Box::contains(const Vec& x) const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || x[i] >= hi[i]) return false;
  return true;
}

Box Box::scaled(double factor) const {
  Box out = *this;
  for (auto& v : out.lo) v *= factor;
  for (auto& v : out.hi) v *= factor;
  return out;
}

std::optional<Box> Box::eroded(double margin) const {
  Box out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] += margin;
    out.hi[i] -= margin;
    if (out.lo[i] >= out.hi[i]) return std::nullopt;
  }
  return out;
}

Box Box::padded(double margin) const {
  Box out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] -= margin;
    out.hi[i] += margin;
  }
  return out;
}

std::optional<Box> box_intersection(const Box& a, const Box& b) {
  Box out;
  const std::size_t d = a.lo.size();
  out.lo.resize(d);
  out.hi.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    out.lo[i] = std::max(a.lo[i], b.lo[i]);
    out.hi[i] = std::min(a.hi[i], b.hi[i]);
    if (out.lo[i] >= out.hi[i]) return std::nullopt;
  }
  return out;
}

Region::Region(std::vector<Box> boxes) : boxes_(std::move(boxes)) {
  for (const auto& b : boxes_) {
    if (b.lo.size() != b.hi.size() || b.lo.empty())
      throw std::invalid_argument("Region: malformed box");
    if (b.dimension() != boxes_.front().dimension())
      throw std::invalid_argument("Region: mixed dimensions");
    for (std::size_t i = 0; i < b.lo.size(); ++i)
      if (!(b.hi[i] > b.lo[i]))
        throw std::invalid_argument("Region: box sides must be positive");
  }
}

Region::Region(Vec lo, Vec hi)
    : Region(std::vector<Box>{Box{std::move(lo), std::move(hi)}}) {}

Region Region::cube(int dimension, double side, double center) {
  Vec lo(dimension, center - side / 2.0);
  Vec hi(dimension, center + side / 2.0);
  return Region(std::move(lo), std::move(hi));
}

int Region::dimension() const {
  return boxes_.empty() ? 0 : boxes_.front().dimension();
}

bool Region::contains(const Vec& x) const {
  for (const auto& b : boxes_)
    if (b.contains(x)) return true;
  return false;
}

double Region::volume() const {
  const std::size_t n = boxes_.size();
  if (n == 0) return 0.0;
  if (n > 24)
    throw std::invalid_argument("Region::volume: too many boxes for exact "
                                "inclusion-exclusion");
  double total = 0.0;
  // Inclusion-exclusion over nonempty subsets; subset intersections of boxes
  // are boxes.
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::optional<Box> inter;
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      if (!inter) {
        inter = boxes_[i];
      } else {
        inter = box_intersection(*inter, boxes_[i]);
        if (!inter) break;
      }
    }
    if (!inter) continue;
    total += (bits % 2 == 1 ? 1.0 : -1.0) * inter->volume();
  }
  return total;
}

Region Region::scaled(double factor) const {
  std::vector<Box> out;
  out.reserve(boxes_.size());
  for (const auto& b : boxes_) out.push_back(b.scaled(factor));
  return Region(std::move(out));
}

Region Region::padded(double margin) const {
  std::vector<Box> out;
  out.reserve(boxes_.size());
  for (const auto& b : boxes_) out.push_back(b.padded(margin));
  return Region(std::move(out));
}

Region Region::eroded(double margin) const {
  std::vector<Box> out;
  for (const auto& b : boxes_) {
    if (auto e = b.eroded(margin)) out.push_back(*e);
  }
  Region r;
  r.boxes_ = std::move(out);
  return r;
}

Box Region::bounding_box() const {
  if (boxes_.empty()) throw std::invalid_argument("bounding_box: empty region");
  Box out = boxes_.front();
  for (const auto& b : boxes_) {
    for (std::size_t i = 0; i < out.lo.size(); ++i) {
      out.lo[i] = std::min(out.lo[i], b.lo[i]);
      out.hi[i] = std::max(out.hi[i], b.hi[i]);
    }
  }
  return out;
}

double Region::interior_clearance(const Vec& x) const {
  double best = 0.0;
  for (const auto& b : boxes_) {
    if (!b.contains(x)) continue;
    double clearance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.lo.size(); ++i)
      clearance = std::min({clearance, x[i] - b.lo[i], b.hi[i] - x[i]});
    best = std::max(best, clearance);
  }
  return best;
}

double region_intersection_volume(const Region& a, const Region& b) {
  std::vector<Box> pieces;
  for (const auto& ba : a.boxes())
    for (const auto& bb : b.boxes())
      if (auto inter = box_intersection(ba, bb)) pieces.push_back(*inter);
  if (pieces.empty()) return 0.0;
  return Region(std::move(pieces)).volume();
}

CellIndex cell_of(const Vec& x, double cell_size) {
  CellIndex out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = static_cast<std::int64_t>(std::floor(x[i] / cell_size));
  return out;
}

Box cell_box(const CellIndex& cell, double cell_size) {
  Box out;
  out.lo.resize(cell.size());
  out.hi.resize(cell.size());
  for (std::size_t i = 0; i < cell.size(); ++i) {
    out.lo[i] = static_cast<double>(cell[i]) * cell_size;
    out.hi[i] = static_cast<double>(cell[i] + 1) * cell_size;
  }
  return out;
}

namespace {

void enumerate_ranges(const std::vector<std::pair<std::int64_t, std::int64_t>>& ranges,
                      std::size_t axis, CellIndex& current,
                      std::set<CellIndex>& out) {
  if (axis == ranges.size()) {
    out.insert(current);
    return;
  }
  for (std::int64_t c = ranges[axis].first; c <= ranges[axis].second; ++c) {
    current[axis] = c;
    enumerate_ranges(ranges, axis + 1, current, out);
  }
}

}  // namespace

std::vector<CellIndex> cells_overlapping(const Region& region, double cell_size,
                                         double margin) {
  std::set<CellIndex> cells;
  for (const auto& box : region.boxes()) {
    const Box padded = box.padded(margin);
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (std::size_t i = 0; i < padded.lo.size(); ++i) {
      const auto first =
          static_cast<std::int64_t>(std::floor(padded.lo[i] / cell_size));
      // hi is exclusive, so a cell starting exactly at hi is not included.
      auto last =
          static_cast<std::int64_t>(std::floor(padded.hi[i] / cell_size));
      if (static_cast<double>(last) * cell_size == padded.hi[i]) --last;
      ranges.emplace_back(first, last);
    }
    CellIndex current(ranges.size());
    enumerate_ranges(ranges, 0, current, cells);
  }
  return {cells.begin(), cells.end()};
}

std::vector<CellIndex> sites_in_region(const Region& region) {
  std::set<CellIndex> sites;
  for (const auto& box : region.boxes()) {
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (std::size_t i = 0; i < box.lo.size(); ++i) {
      const auto first = static_cast<std::int64_t>(std::ceil(box.lo[i]));
      auto last = static_cast<std::int64_t>(std::floor(box.hi[i]));
      if (static_cast<double>(last) == box.hi[i]) --last;  // half-open
      ranges.emplace_back(first, last);
    }
    bool empty = false;
    for (const auto& r : ranges) empty = empty || r.second < r.first;
    if (empty) continue;
    CellIndex current(ranges.size());
    enumerate_ranges(ranges, 0, current, sites);
  }
  return {sites.begin(), sites.end()};
}

}  // namespace rsalab
