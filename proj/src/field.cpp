#include "rsalab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "rsalab/rng.hpp"

namespace rsalab {

bool arrival_less(const SpaceTimePoint& a, const SpaceTimePoint& b) {
  if (a.t != b.t) return a.t < b.t;
  return lex_less(a.x, b.x);
}

bool arrival_sorted(const std::vector<SpaceTimePoint>& pts) {
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (arrival_less(pts[i], pts[i - 1])) return false;
  return true;
}

namespace {

std::uint64_t cell_key(const CellField& field, StreamTag tag,
                       const CellIndex& cell) {
  std::uint64_t h = chain(field.master_seed, tag);
  for (const auto c : cell) h = chain(h, std::bit_cast<std::uint64_t>(c));
  return h;
}

}  // namespace

CellField make_field(std::uint64_t master_seed, int dimension, FieldMode mode,
                     double tau, double cell_size) {
  if (dimension < 1) throw std::invalid_argument("make_field: dimension >= 1");
  if (cell_size < 2.0)
    throw std::invalid_argument(
        "make_field: cell_size must be >= 2 (the interaction diameter)");
  if (mode == FieldMode::continuum) {
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw std::invalid_argument(
          "make_field: continuum mode requires finite tau > 0");
  } else {
    if (std::isfinite(tau))
      throw std::invalid_argument(
          "make_field: lattice mode admits unbounded tau only");
  }
  CellField f;
  f.master_seed = master_seed;
  f.dimension = dimension;
  f.mode = mode;
  f.tau = tau;
  f.cell_size = cell_size;
  return f;
}

std::vector<SpaceTimePoint> cell_points(const CellField& field,
                                        const CellIndex& cell) {
  if (field.mode != FieldMode::continuum)
    throw std::invalid_argument("cell_points: continuum mode only");
  if (static_cast<int>(cell.size()) != field.dimension)
    throw std::invalid_argument("cell_points: cell index dimension mismatch");

  const std::uint64_t key = cell_key(field, kTagCellPoints, cell);
  CounterRng rng(key);
  const double h = field.cell_size;
  const double mean = std::pow(h, field.dimension) * field.tau;
  const std::uint64_t n = rng.next_poisson(mean);

  std::vector<SpaceTimePoint> pts(n);
  for (auto& p : pts) {
    p.x.resize(field.dimension);
    for (int i = 0; i < field.dimension; ++i) {
      const double lo = static_cast<double>(cell[i]) * h;
      p.x[i] = rng.next_uniform(lo, lo + h);
    }
    p.t = rng.next_uniform(0.0, field.tau);
  }
  std::sort(pts.begin(), pts.end(), arrival_less);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].uid = chain(key, i);
  return pts;
}

std::vector<SpaceTimePoint> sample_window(const CellField& field,
                                          const Region& region) {
  if (field.mode != FieldMode::continuum)
    throw std::invalid_argument("sample_window: continuum mode only");
  std::vector<SpaceTimePoint> out;
  if (region.empty()) return out;
  for (const auto& cell : cells_overlapping(region, field.cell_size)) {
    for (auto& p : cell_points(field, cell))
      if (region.contains(p.x)) out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), arrival_less);
  return out;
}

std::vector<double> lattice_arrivals(const CellField& field,
                                     const CellIndex& site, double horizon) {
  if (field.mode != FieldMode::lattice)
    throw std::invalid_argument("lattice_arrivals: lattice mode only");
  if (!(horizon > 0.0))
    throw std::invalid_argument("lattice_arrivals: horizon must be positive");
  CounterRng rng(cell_key(field, kTagLatticeSite, site));
  std::vector<double> times;
  double t = rng.next_exponential(1.0);
  while (t <= horizon) {
    times.push_back(t);
    t += rng.next_exponential(1.0);
  }
  return times;
}

double first_arrival(const CellField& field, const CellIndex& site) {
  CounterRng rng(cell_key(field, kTagLatticeSite, site));
  return rng.next_exponential(1.0);
}

int point_mark(const SpaceTimePoint& p, int n_types) {
  if (n_types < 1) throw std::invalid_argument("point_mark: n_types >= 1");
  return static_cast<int>(CounterRng(chain(p.uid, kTagPointMark)).next_below(
      static_cast<std::uint64_t>(n_types)));
}

void assign_marks(std::vector<SpaceTimePoint>& pts, int n_types) {
  for (auto& p : pts) p.mark = point_mark(p, n_types);
}

double point_lifetime(const SpaceTimePoint& p, double rate) {
  if (rate < 0.0) throw std::invalid_argument("point_lifetime: rate >= 0");
  if (rate == 0.0) return kUnboundedTime;
  return CounterRng(chain(p.uid, kTagPointLifetime)).next_exponential(rate);
}

std::string to_string(FieldMode mode) {
  return mode == FieldMode::continuum ? "continuum" : "lattice";
}

}  // namespace rsalab
