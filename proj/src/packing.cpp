#include "rsalab/packing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "rsalab/grid_index.hpp"

namespace rsalab {

bool overlaps(const Vec& x1, const Vec& x2) {
  return squared_distance(x1, x2) < 4.0;
}

std::size_t PackedSample::accepted_count() const {
  std::size_t n = 0;
  for (const auto f : accepted) n += f;
  return n;
}

std::vector<Vec> PackedSample::accepted_positions() const {
  std::vector<Vec> out;
  out.reserve(accepted_count());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (accepted[i]) out.push_back(points[i].x);
  return out;
}

std::vector<std::uint8_t> pack_flags(const std::vector<SpaceTimePoint>& points) {
  if (!arrival_sorted(points))
    throw std::invalid_argument("pack_flags: input must be in arrival order");
  std::vector<std::uint8_t> flags(points.size(), 0);
  if (points.empty()) return flags;
  GridIndex grid(static_cast<int>(points.front().x.size()), 2.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (grid.any_within(points[i].x, 2.0)) continue;
    flags[i] = 1;
    grid.insert(i, points[i].x);
  }
  return flags;
}

PackedSample pack_sequential(std::vector<SpaceTimePoint> points) {
  PackedSample out;
  out.accepted = pack_flags(points);
  out.points = std::move(points);
  return out;
}

std::vector<std::uint8_t> desorption_flags(
    const std::vector<SpaceTimePoint>& points, double tau) {
  if (!arrival_sorted(points))
    throw std::invalid_argument("desorption_flags: input must be sorted");
  std::vector<std::uint8_t> present(points.size(), 0);
  if (points.empty()) return present;
  const int dim = static_cast<int>(points.front().x.size());

  GridIndex grid(dim, 2.0);
  // Departure queue of (departure time, index). The grid has no erase, so
  // it is rebuilt from the present set after each departure sweep;
  // departures are at most as frequent as arrivals.
  using Departure = std::pair<double, std::size_t>;
  std::priority_queue<Departure, std::vector<Departure>, std::greater<>> leaving;

  auto rebuild = [&grid, &points, &present, dim]() {
    grid = GridIndex(dim, 2.0);
    for (std::size_t j = 0; j < points.size(); ++j)
      if (present[j]) grid.insert(j, points[j].x);
  };

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].lifetime.has_value())
      throw std::invalid_argument("desorption_flags: lifetimes must be set");
    const double now = points[i].t;
    bool removed = false;
    while (!leaving.empty() && leaving.top().first <= now) {
      present[leaving.top().second] = 0;
      leaving.pop();
      removed = true;
    }
    if (removed) rebuild();

    const bool blocked = grid.visit_within(
        points[i].x, 2.0,
        [&present](std::size_t j, double) { return present[j] != 0; });
    if (blocked) continue;
    present[i] = 1;
    grid.insert(i, points[i].x);
    const double depart = now + *points[i].lifetime;
    if (depart <= tau) leaving.emplace(depart, i);
  }
  // Remaining scheduled departures happen by tau: those balls are gone.
  while (!leaving.empty()) {
    present[leaving.top().second] = 0;
    leaving.pop();
  }
  return present;
}

PackedSample simulate_desorption(const CellField& field, const Region& region,
                                 double lifetime_rate) {
  if (lifetime_rate < 0.0)
    throw std::invalid_argument("simulate_desorption: rate >= 0");
  auto points = sample_window(field, region);
  for (auto& p : points) p.lifetime = point_lifetime(p, lifetime_rate);

  PackedSample out;
  out.accepted = desorption_flags(points, field.tau);
  out.points = std::move(points);
  out.field_seed = field.master_seed;
  out.mode = field.mode;
  out.tau = field.tau;
  out.region = region;
  return out;
}

std::vector<std::uint8_t> birth_growth_flags(
    const std::vector<SpaceTimePoint>& points, double speed,
    double initial_radius, double tau) {
  if (!(speed > 0.0))
    throw std::invalid_argument("birth_growth_flags: speed > 0");
  if (initial_radius < 0.0)
    throw std::invalid_argument("birth_growth_flags: initial_radius >= 0");
  if (!arrival_sorted(points))
    throw std::invalid_argument("birth_growth_flags: input must be sorted");
  std::vector<std::uint8_t> flags(points.size(), 0);
  if (points.empty()) return flags;

  const double max_radius = initial_radius + speed * tau;
  GridIndex grid(static_cast<int>(points.front().x.size()),
                 std::max(2.0, max_radius));
  std::vector<double> birth;  // birth times of accepted seeds, by grid id
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double t = points[i].t;
    const bool covered = grid.visit_within(
        points[i].x, max_radius + 1e-12, [&](std::size_t j, double d2) {
          const double grown = initial_radius + speed * (t - birth[j]);
          return d2 <= grown * grown;
        });
    if (covered) continue;
    flags[i] = 1;
    grid.insert(birth.size(), points[i].x);
    birth.push_back(t);
  }
  return flags;
}

PackedSample simulate_birth_growth(const CellField& field, const Region& region,
                                   double speed, double initial_radius) {
  auto points = sample_window(field, region);
  PackedSample out;
  out.accepted = birth_growth_flags(points, speed, initial_radius, field.tau);
  out.points = std::move(points);
  out.field_seed = field.master_seed;
  out.mode = field.mode;
  out.tau = field.tau;
  out.region = region;
  return out;
}

PackedSample filter_by_mark(const PackedSample& sample, int mark) {
  PackedSample out;
  out.field_seed = sample.field_seed;
  out.mode = sample.mode;
  out.tau = sample.tau;
  out.region = sample.region;
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    if (!sample.points[i].mark.has_value())
      throw std::invalid_argument("filter_by_mark: sample has unmarked points");
    if (*sample.points[i].mark != mark) continue;
    out.points.push_back(sample.points[i]);
    out.accepted.push_back(sample.accepted[i]);
  }
  return out;
}

bool is_hard_core(const std::vector<SpaceTimePoint>& points,
                  const std::vector<std::uint8_t>& flags) {
  if (points.empty()) return true;
  GridIndex grid(static_cast<int>(points.front().x.size()), 2.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!flags[i]) continue;
    if (grid.any_within(points[i].x, 2.0)) return false;
    grid.insert(i, points[i].x);
  }
  return true;
}

}  // namespace rsalab
