#include "rsalab/causal.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "rsalab/grid_index.hpp"

namespace rsalab {

namespace {

// Slack added to radius-2 neighborhood queries so the <=2 graph relation is
// never lost to rounding; exact predicates are applied afterwards.
constexpr double kEdgeSlack = 1e-9;

constexpr std::int8_t kUnknown = 0;
constexpr std::int8_t kDeciding = 1;
constexpr std::int8_t kAccepted = 2;
constexpr std::int8_t kRejected = 3;

std::int64_t chebyshev(const CellIndex& a, const CellIndex& b) {
  std::int64_t m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Vec site_position(const CellIndex& site) {
  Vec x(site.size());
  for (std::size_t i = 0; i < site.size(); ++i)
    x[i] = static_cast<double>(site[i]);
  return x;
}

}  // namespace

std::int64_t exploration_cap_cells(const CellField& field) {
  if (field.cap_cells > 0) return field.cap_cells;
  const double t = std::isfinite(field.tau) ? field.tau : 1.0;
  return static_cast<std::int64_t>(std::ceil(200.0 * std::max(1.0, t)));
}

CausalGraph build_causal_graph(const std::vector<SpaceTimePoint>& points) {
  const std::size_t n = points.size();
  CausalGraph g;
  g.out.resize(n);
  g.in.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (points[i].t > points[j].t) continue;
      if (squared_distance(points[i].x, points[j].x) > 4.0) continue;
      g.out[i].push_back(j);
      g.in[j].push_back(i);
    }
  }
  return g;
}

namespace {

CausalCone cone_on_list(const SpaceTimePoint& w,
                        const std::vector<SpaceTimePoint>& points,
                        ConeDirection direction) {
  std::vector<SpaceTimePoint> pts = points;
  std::size_t root = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].t == w.t && pts[i].x == w.x) {
      root = i;
      break;
    }
  }
  if (root == pts.size()) pts.push_back(w);  // inserted test point

  const CausalGraph g = build_causal_graph(pts);
  const auto& step = direction == ConeDirection::backward ? g.in : g.out;
  std::vector<std::uint8_t> seen(pts.size(), 0);
  std::vector<std::size_t> queue{root};
  seen[root] = 1;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    for (const auto nb : step[queue[qi]]) {
      if (seen[nb]) continue;
      seen[nb] = 1;
      queue.push_back(nb);
    }
  }

  CausalCone cone;
  cone.root = w;
  cone.direction = direction;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (seen[i]) cone.members.push_back(pts[i]);
  std::sort(cone.members.begin(), cone.members.end(), arrival_less);
  for (const auto& m : cone.members) {
    cone.spatial_radius = std::max(cone.spatial_radius, distance(m.x, w.x));
    cone.time_extent = std::max(cone.time_extent, std::abs(m.t - w.t));
  }
  return cone;
}

}  // namespace

CausalCone backward_cone(const SpaceTimePoint& w,
                         const std::vector<SpaceTimePoint>& points) {
  return cone_on_list(w, points, ConeDirection::backward);
}

CausalCone forward_cone(const SpaceTimePoint& w,
                        const std::vector<SpaceTimePoint>& points) {
  return cone_on_list(w, points, ConeDirection::forward);
}

namespace {

// Demand-driven acceptance evaluation against the infinite continuum field,
// optionally with inserted test points that take part in the blocking.
// Field cells are generated on first touch and every decision is memoized,
// so the work done equals the part of the backward cone the acceptance
// recursion actually needs.
class LazyPackingContext {
 public:
  static constexpr std::uint32_t kInsertedSlot = 0xffffffffu;

  struct Handle {
    std::uint32_t slot;
    std::uint32_t idx;
    bool operator==(const Handle&) const = default;
  };

  LazyPackingContext(const CellField& field, std::vector<SpaceTimePoint> tests)
      : field_(field),
        inserted_(std::move(tests)),
        inserted_status_(inserted_.size(), kUnknown),
        cap_(exploration_cap_cells(field)) {
    if (field.mode != FieldMode::continuum)
      throw std::invalid_argument("lazy packing: continuum field required");
  }

  bool inserted_flag(std::size_t i) {
    anchor(inserted_[i].x);
    const Handle h{kInsertedSlot, static_cast<std::uint32_t>(i)};
    decide(h);
    return status(h) == kAccepted;
  }

  // Earliest-arriving accepted field point overlapping a ball at x, up to
  // t_max; +infinity if none.
  double first_accepted_blocker(const Vec& x, double t_max) {
    anchor(x);
    std::vector<Handle> cands = field_candidates(x, t_max);
    for (const auto& h : cands) {
      decide(h);
      if (status(h) == kAccepted) return point(h).t;
    }
    return kUnboundedTime;
  }

 private:
  struct CellData {
    std::vector<SpaceTimePoint> pts;
    std::vector<std::int8_t> status;
  };

  struct Frame {
    Handle h;
    std::vector<Handle> cands;
    std::size_t next = 0;
    bool built = false;
  };

  void anchor(const Vec& x) {
    if (!origin_set_) {
      origin_ = cell_of(x, field_.cell_size);
      origin_set_ = true;
    }
  }

  const SpaceTimePoint& point(const Handle& h) const {
    if (h.slot == kInsertedSlot) return inserted_[h.idx];
    return cells_[h.slot].pts[h.idx];
  }

  std::int8_t status(const Handle& h) const {
    if (h.slot == kInsertedSlot) return inserted_status_[h.idx];
    return cells_[h.slot].status[h.idx];
  }

  void set_status(const Handle& h, std::int8_t s) {
    if (h.slot == kInsertedSlot)
      inserted_status_[h.idx] = s;
    else
      cells_[h.slot].status[h.idx] = s;
  }

  std::uint32_t load_cell(const CellIndex& cell) {
    const auto it = slot_of_.find(cell);
    if (it != slot_of_.end()) return it->second;
    if (chebyshev(cell, origin_) > cap_)
      throw ConeCapError("lazy packing: exploration cap exceeded");
    CellData data;
    data.pts = cell_points(field_, cell);
    data.status.assign(data.pts.size(), kUnknown);
    const auto slot = static_cast<std::uint32_t>(cells_.size());
    cells_.push_back(std::move(data));
    slot_of_.emplace(cell, slot);
    return slot;
  }

  // Field points within distance < 2 of x arriving at or before t_max,
  // in arrival order.
  std::vector<Handle> field_candidates(const Vec& x, double t_max) {
    std::vector<Handle> cands;
    const double h = field_.cell_size;
    const CellIndex lo = cell_of(shifted(x, -2.0), h);
    const CellIndex hi = cell_of(shifted(x, +2.0), h);
    CellIndex probe(x.size());
    enumerate_cells(lo, hi, probe, 0, [&](const CellIndex& cell) {
      const std::uint32_t slot = load_cell(cell);
      const auto& pts = cells_[slot].pts;
      for (std::uint32_t k = 0; k < pts.size(); ++k) {
        if (pts[k].t > t_max) break;  // cell lists are arrival-sorted
        if (squared_distance(pts[k].x, x) < 4.0)
          cands.push_back(Handle{slot, k});
      }
    });
    std::sort(cands.begin(), cands.end(), [this](const Handle& a, const Handle& b) {
      return arrival_less(point(a), point(b));
    });
    return cands;
  }

  static Vec shifted(Vec x, double delta) {
    for (auto& v : x) v += delta;
    return x;
  }

  template <class F>
  void enumerate_cells(const CellIndex& lo, const CellIndex& hi,
                       CellIndex& probe, std::size_t axis, F&& f) {
    if (axis == probe.size()) {
      f(probe);
      return;
    }
    for (std::int64_t c = lo[axis]; c <= hi[axis]; ++c) {
      probe[axis] = c;
      enumerate_cells(lo, hi, probe, axis + 1, f);
    }
  }

  // Blocking candidates of p: every point (field or inserted) strictly
  // earlier in arrival order and within distance < 2.
  std::vector<Handle> blocking_candidates(const Handle& hp) {
    const SpaceTimePoint p = point(hp);  // copy: cells_ may reallocate
    std::vector<Handle> cands = field_candidates(p.x, p.t);
    // field_candidates keeps everything up to t == p.t; drop p itself and
    // later ties.
    std::erase_if(cands, [&](const Handle& h) {
      return !arrival_less(point(h), p);
    });
    for (std::uint32_t j = 0; j < inserted_.size(); ++j) {
      const Handle hj{kInsertedSlot, j};
      if (hj == hp) continue;
      if (!arrival_less(inserted_[j], p)) continue;
      if (squared_distance(inserted_[j].x, p.x) >= 4.0) continue;
      cands.push_back(hj);
    }
    std::sort(cands.begin(), cands.end(), [this](const Handle& a, const Handle& b) {
      return arrival_less(point(a), point(b));
    });
    return cands;
  }

  void decide(const Handle& start) {
    if (status(start) != kUnknown) return;
    set_status(start, kDeciding);
    std::vector<Frame> stack;
    stack.push_back(Frame{start, {}, 0, false});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (!f.built) {
        f.cands = blocking_candidates(f.h);
        f.built = true;
      }
      int outcome = kAccepted;
      bool descended = false;
      while (f.next < f.cands.size()) {
        const Handle q = f.cands[f.next];
        const std::int8_t st = status(q);
        if (st == kAccepted) {
          outcome = kRejected;
          break;
        }
        if (st == kRejected) {
          ++f.next;
          continue;
        }
        assert(st == kUnknown);  // strict arrival order forbids cycles
        set_status(q, kDeciding);
        stack.push_back(Frame{q, {}, 0, false});
        descended = true;
        break;
      }
      if (descended) continue;
      set_status(f.h, static_cast<std::int8_t>(outcome));
      stack.pop_back();
    }
  }

  const CellField& field_;
  std::vector<SpaceTimePoint> inserted_;
  std::vector<std::int8_t> inserted_status_;
  std::int64_t cap_;
  bool origin_set_ = false;
  CellIndex origin_;
  std::vector<CellData> cells_;
  std::unordered_map<CellIndex, std::uint32_t, CellIndexHash> slot_of_;
};

// --- lattice priority recursion --------------------------------------------

class LatticeJamContext {
 public:
  // Pre-accepted extra occupancies (site position, occupancy time) injected
  // into the dynamics; used when test arrivals are evaluated jointly.
  struct Occupancy {
    Vec x;
    double t;
  };

  explicit LatticeJamContext(const CellField& field,
                             std::vector<Occupancy> extra = {})
      : field_(field),
        extra_(std::move(extra)),
        offsets_(lattice_neighbor_offsets(field.dimension)),
        cap_(exploration_cap_cells(field)) {
    if (field.mode != FieldMode::lattice)
      throw std::invalid_argument("lattice jamming: lattice field required");
  }

  bool jammed(const CellIndex& site) {
    anchor(site);
    decide(site);
    return info(site).status == kAccepted;
  }

  double arrival(const CellIndex& site) {
    anchor(site);
    return info(site).t1;
  }

 private:
  struct SiteInfo {
    double t1;
    std::int8_t status;
  };

  struct Frame {
    CellIndex site;
    std::vector<CellIndex> cands;
    std::size_t next = 0;
    bool built = false;
  };

  void anchor(const CellIndex& site) {
    if (!origin_set_) {
      origin_ = site;
      origin_set_ = true;
    }
  }

  SiteInfo& info(const CellIndex& site) {
    const auto it = sites_.find(site);
    if (it != sites_.end()) return it->second;
    if (chebyshev(site, origin_) > cap_)
      throw ConeCapError("lattice jamming: exploration cap exceeded");
    return sites_.emplace(site, SiteInfo{first_arrival(field_, site), kUnknown})
        .first->second;
  }

  bool priority_less(const CellIndex& a, const CellIndex& b) {
    const double ta = info(a).t1;
    const double tb = info(b).t1;
    if (ta != tb) return ta < tb;
    return a < b;
  }

  // Neighbors with earlier priority, earliest first.
  std::vector<CellIndex> earlier_neighbors(const CellIndex& z) {
    std::vector<CellIndex> out;
    for (const auto& off : offsets_) {
      CellIndex y(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] + off[i];
      if (priority_less(y, z)) out.push_back(std::move(y));
    }
    std::sort(out.begin(), out.end(), [this](const CellIndex& a, const CellIndex& b) {
      return priority_less(a, b);
    });
    return out;
  }

  void decide(const CellIndex& start) {
    if (info(start).status != kUnknown) return;
    info(start).status = kDeciding;
    std::vector<Frame> stack;
    stack.push_back(Frame{start, {}, 0, false});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (!f.built) {
        f.cands = earlier_neighbors(f.site);
        f.built = true;
      }
      int outcome = blocked_by_extra(f.site) ? kRejected : kAccepted;
      bool descended = false;
      while (outcome == kAccepted && f.next < f.cands.size()) {
        const CellIndex& y = f.cands[f.next];
        const std::int8_t st = info(y).status;
        if (st == kAccepted) {
          outcome = kRejected;
          break;
        }
        if (st == kRejected) {
          ++f.next;
          continue;
        }
        assert(st == kUnknown);
        info(y).status = kDeciding;
        stack.push_back(Frame{y, {}, 0, false});
        descended = true;
        break;
      }
      if (descended) continue;
      info(f.site).status = static_cast<std::int8_t>(outcome);
      stack.pop_back();
    }
  }

  bool blocked_by_extra(const CellIndex& z) {
    if (extra_.empty()) return false;
    const double t1 = info(z).t1;
    const Vec xz = site_position(z);
    for (const auto& occ : extra_) {
      if (occ.t < t1 && squared_distance(occ.x, xz) < 4.0) return true;
    }
    return false;
  }

  const CellField& field_;
  std::vector<Occupancy> extra_;
  std::vector<CellIndex> offsets_;
  std::int64_t cap_;
  bool origin_set_ = false;
  CellIndex origin_;
  std::unordered_map<CellIndex, SiteInfo, CellIndexHash> sites_;
};

}  // namespace

std::vector<CellIndex> lattice_neighbor_offsets(int dimension) {
  std::vector<CellIndex> out;
  CellIndex probe(dimension, -1);
  while (true) {
    std::int64_t norm2 = 0;
    for (const auto v : probe) norm2 += v * v;
    if (norm2 > 0 && norm2 < 4) out.push_back(probe);
    int axis = dimension - 1;
    while (axis >= 0 && probe[axis] == 1) probe[axis--] = -1;
    if (axis < 0) break;
    ++probe[axis];
  }
  return out;
}

bool sigma_infinite(const SpaceTimePoint& w, const CellField& field) {
  if (field.mode == FieldMode::lattice) {
    CellIndex site(w.x.size());
    for (std::size_t i = 0; i < w.x.size(); ++i) {
      site[i] = std::llround(w.x[i]);
      if (std::abs(w.x[i] - static_cast<double>(site[i])) > 1e-9)
        throw std::invalid_argument(
            "sigma_infinite: lattice test points must sit on sites");
    }
    return first_blocking_time(field, w.x, w.t) >= w.t;
  }
  LazyPackingContext ctx(field, {w});
  return ctx.inserted_flag(0);
}

std::vector<std::uint8_t> sigma_joint(const std::vector<SpaceTimePoint>& tests,
                                      const CellField& field) {
  std::vector<std::uint8_t> flags(tests.size(), 0);
  if (field.mode == FieldMode::continuum) {
    LazyPackingContext ctx(field, tests);
    for (std::size_t i = 0; i < tests.size(); ++i)
      flags[i] = ctx.inserted_flag(i) ? 1 : 0;
    return flags;
  }
  // Lattice: evaluate test arrivals in time order. An accepted test becomes
  // an occupancy injected into the dynamics seen by every later test; the
  // occupancies relevant to a site's decision all precede that site's first
  // arrival, so processing tests in order keeps each decision exact.
  std::vector<std::size_t> order(tests.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return arrival_less(tests[a], tests[b]);
  });
  std::vector<LatticeJamContext::Occupancy> occupied;
  const auto offsets = lattice_neighbor_offsets(field.dimension);
  for (const auto idx : order) {
    const auto& w = tests[idx];
    CellIndex site(w.x.size());
    for (std::size_t i = 0; i < w.x.size(); ++i) {
      site[i] = std::llround(w.x[i]);
      if (std::abs(w.x[i] - static_cast<double>(site[i])) > 1e-9)
        throw std::invalid_argument(
            "sigma_joint: lattice test points must sit on sites");
    }
    bool blocked = false;
    for (const auto& occ : occupied)
      if (squared_distance(occ.x, w.x) < 4.0) blocked = true;
    if (!blocked) {
      LatticeJamContext ctx(field, occupied);
      std::vector<CellIndex> probe_sites{site};
      for (const auto& off : offsets) {
        CellIndex y(site.size());
        for (std::size_t i = 0; i < site.size(); ++i) y[i] = site[i] + off[i];
        probe_sites.push_back(std::move(y));
      }
      for (const auto& y : probe_sites) {
        if (ctx.arrival(y) < w.t && ctx.jammed(y)) {
          blocked = true;
          break;
        }
      }
    }
    flags[idx] = blocked ? 0 : 1;
    if (!blocked) occupied.push_back({w.x, w.t});
  }
  return flags;
}

double first_blocking_time(const CellField& field, const Vec& x, double t_max) {
  if (static_cast<int>(x.size()) != field.dimension)
    throw std::invalid_argument("first_blocking_time: dimension mismatch");
  if (field.mode == FieldMode::continuum) {
    LazyPackingContext ctx(field, {});
    return ctx.first_accepted_blocker(x, std::min(t_max, field.tau));
  }
  // Lattice: the site's own clock blocks (an earlier own arrival is either
  // packed, or rejected by a neighbor that is then still present), and so
  // does any accepted neighbor within distance < 2.
  CellIndex site(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    site[i] = std::llround(x[i]);
    if (std::abs(x[i] - static_cast<double>(site[i])) > 1e-9)
      throw std::invalid_argument(
          "first_blocking_time: lattice queries must sit on sites");
  }
  LatticeJamContext ctx(field);
  double best = first_arrival(field, site);
  std::vector<std::pair<double, CellIndex>> neighbors;
  for (const auto& off : lattice_neighbor_offsets(field.dimension)) {
    CellIndex y(site.size());
    for (std::size_t i = 0; i < site.size(); ++i) y[i] = site[i] + off[i];
    neighbors.emplace_back(ctx.arrival(y), std::move(y));
  }
  std::sort(neighbors.begin(), neighbors.end());
  for (const auto& [t1, y] : neighbors) {
    if (t1 >= best) break;
    if (ctx.jammed(y)) {
      best = t1;
      break;
    }
  }
  return best <= t_max ? best : kUnboundedTime;
}

PackedSample pack_window_infinite(const CellField& field, const Region& region) {
  if (field.mode != FieldMode::continuum)
    throw std::invalid_argument("pack_window_infinite: continuum mode only");
  PackedSample out;
  out.field_seed = field.master_seed;
  out.mode = field.mode;
  out.tau = field.tau;
  out.region = region;
  if (region.empty()) return out;

  const double h = field.cell_size;
  const double cap_units =
      static_cast<double>(exploration_cap_cells(field)) * h;
  double margin = h * (3.0 + std::ceil(std::max(1.0, field.tau)));

  while (true) {
    const Region padded = region.padded(margin);
    std::vector<SpaceTimePoint> pts;
    for (const auto& cell : cells_overlapping(region, h, margin))
      for (auto& p : cell_points(field, cell)) pts.push_back(std::move(p));
    std::sort(pts.begin(), pts.end(), arrival_less);

    GridIndex grid(field.dimension, std::max(2.0, h));
    for (std::size_t i = 0; i < pts.size(); ++i) grid.insert(i, pts[i].x);

    // A point is contaminated when its acceptance could depend on
    // unexplored territory: it either sits within interaction range of the
    // frontier or is linked to such a point by a backward chain of graph
    // edges. One forward sweep in arrival order settles all points.
    std::vector<std::uint8_t> contaminated(pts.size(), 0);
    bool window_clean = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool c = padded.interior_clearance(pts[i].x) < 2.0 + kEdgeSlack;
      if (!c) {
        c = grid.visit_within(
            pts[i].x, 2.0 + kEdgeSlack, [&](std::size_t j, double) {
              return contaminated[j] && arrival_less(pts[j], pts[i]);
            });
      }
      contaminated[i] = c ? 1 : 0;
      if (c && window_clean && region.contains(pts[i].x)) window_clean = false;
    }

    if (window_clean) {
      const auto flags = pack_flags(pts);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!region.contains(pts[i].x)) continue;
        out.points.push_back(pts[i]);
        out.accepted.push_back(flags[i]);
      }
      return out;
    }
    margin *= 2.0;
    if (margin > cap_units)
      throw ConeCapError("pack_window_infinite: exploration cap exceeded");
  }
}

CausalCone causal_cone_infinite(const SpaceTimePoint& w, const CellField& field,
                                ConeDirection direction) {
  if (field.mode != FieldMode::continuum)
    throw std::invalid_argument("causal_cone_infinite: continuum mode only");

  struct CellData {
    std::vector<SpaceTimePoint> pts;
  };
  std::unordered_map<CellIndex, std::uint32_t, CellIndexHash> slot_of;
  std::vector<CellData> cells;
  const CellIndex origin = cell_of(w.x, field.cell_size);
  const std::int64_t cap = exploration_cap_cells(field);

  auto load = [&](const CellIndex& cell) -> std::uint32_t {
    const auto it = slot_of.find(cell);
    if (it != slot_of.end()) return it->second;
    if (chebyshev(cell, origin) > cap)
      throw ConeCapError("causal_cone_infinite: exploration cap exceeded");
    cells.push_back(CellData{cell_points(field, cell)});
    const auto slot = static_cast<std::uint32_t>(cells.size() - 1);
    slot_of.emplace(cell, slot);
    return slot;
  };

  auto pack_handle = [](std::uint32_t slot, std::uint32_t idx) -> std::uint64_t {
    return (static_cast<std::uint64_t>(slot) << 32) | idx;
  };

  std::unordered_set<std::uint64_t> member_set;
  std::vector<SpaceTimePoint> members;

  auto sweep = [&](bool backward) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<SpaceTimePoint> queue{w};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const SpaceTimePoint m = queue[qi];
      const double h = field.cell_size;
      Vec lo = m.x, hi = m.x;
      for (auto& v : lo) v -= 2.0;
      for (auto& v : hi) v += 2.0;
      const CellIndex clo = cell_of(lo, h);
      const CellIndex chi = cell_of(hi, h);
      CellIndex probe(m.x.size());
      std::vector<std::pair<std::uint32_t, std::uint32_t>> found;
      std::function<void(std::size_t)> rec = [&](std::size_t axis) {
        if (axis == probe.size()) {
          const std::uint32_t slot = load(probe);
          const auto& pts = cells[slot].pts;
          for (std::uint32_t k = 0; k < pts.size(); ++k) {
            const bool time_ok = backward ? pts[k].t <= m.t : pts[k].t >= m.t;
            if (!time_ok) continue;
            if (squared_distance(pts[k].x, m.x) > 4.0) continue;
            found.emplace_back(slot, k);
          }
          return;
        }
        for (std::int64_t c = clo[axis]; c <= chi[axis]; ++c) {
          probe[axis] = c;
          rec(axis + 1);
        }
      };
      rec(0);
      for (const auto& [slot, k] : found) {
        const std::uint64_t hid = pack_handle(slot, k);
        if (!seen.insert(hid).second) continue;
        if (member_set.insert(hid).second) members.push_back(cells[slot].pts[k]);
        queue.push_back(cells[slot].pts[k]);
      }
    }
  };

  if (direction == ConeDirection::backward || direction == ConeDirection::both)
    sweep(true);
  if (direction == ConeDirection::forward || direction == ConeDirection::both)
    sweep(false);

  CausalCone cone;
  cone.root = w;
  cone.direction = direction;
  cone.members = std::move(members);
  // Drop a field copy of the root if present, then add the root once.
  std::erase_if(cone.members, [&](const SpaceTimePoint& p) {
    return p.t == w.t && p.x == w.x;
  });
  cone.members.push_back(w);
  std::sort(cone.members.begin(), cone.members.end(), arrival_less);
  for (const auto& m : cone.members) {
    cone.spatial_radius = std::max(cone.spatial_radius, distance(m.x, w.x));
    cone.time_extent = std::max(cone.time_extent, std::abs(m.t - w.t));
  }
  return cone;
}

std::vector<std::uint8_t> jam_priority_flags(
    const std::vector<CellIndex>& sites, const std::vector<double>& arrivals) {
  if (sites.size() != arrivals.size())
    throw std::invalid_argument("jam_priority_flags: size mismatch");
  if (sites.empty()) return {};
  const int dim = static_cast<int>(sites.front().size());
  std::unordered_map<CellIndex, std::size_t, CellIndexHash> index;
  for (std::size_t i = 0; i < sites.size(); ++i) index.emplace(sites[i], i);
  const auto offsets = lattice_neighbor_offsets(dim);

  auto priority_less = [&](std::size_t a, std::size_t b) {
    if (arrivals[a] != arrivals[b]) return arrivals[a] < arrivals[b];
    return sites[a] < sites[b];
  };

  std::vector<std::int8_t> status(sites.size(), kUnknown);
  struct Frame {
    std::size_t idx;
    std::vector<std::size_t> cands;
    std::size_t next = 0;
    bool built = false;
  };

  for (std::size_t start = 0; start < sites.size(); ++start) {
    if (status[start] != kUnknown) continue;
    status[start] = kDeciding;
    std::vector<Frame> stack;
    stack.push_back(Frame{start, {}, 0, false});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (!f.built) {
        for (const auto& off : offsets) {
          CellIndex y(sites[f.idx]);
          for (std::size_t i = 0; i < y.size(); ++i) y[i] += off[i];
          const auto it = index.find(y);
          if (it == index.end()) continue;
          if (priority_less(it->second, f.idx)) f.cands.push_back(it->second);
        }
        std::sort(f.cands.begin(), f.cands.end(), priority_less);
        f.built = true;
      }
      int outcome = kAccepted;
      bool descended = false;
      while (f.next < f.cands.size()) {
        const std::size_t y = f.cands[f.next];
        if (status[y] == kAccepted) {
          outcome = kRejected;
          break;
        }
        if (status[y] == kRejected) {
          ++f.next;
          continue;
        }
        assert(status[y] == kUnknown);
        status[y] = kDeciding;
        stack.push_back(Frame{y, {}, 0, false});
        descended = true;
        break;
      }
      if (descended) continue;
      status[f.idx] = static_cast<std::int8_t>(outcome);
      stack.pop_back();
    }
  }

  std::vector<std::uint8_t> flags(sites.size(), 0);
  for (std::size_t i = 0; i < sites.size(); ++i)
    flags[i] = status[i] == kAccepted ? 1 : 0;
  return flags;
}

bool lattice_site_jammed(const CellField& field, const CellIndex& site) {
  LatticeJamContext ctx(field);
  return ctx.jammed(site);
}

std::vector<CellIndex> jam_lattice_window(const CellField& field,
                                          const Region& window) {
  if (field.mode != FieldMode::lattice)
    throw std::invalid_argument("jam_lattice_window: lattice mode only");
  LatticeJamContext ctx(field);
  std::vector<CellIndex> accepted;
  for (const auto& site : sites_in_region(window))
    if (ctx.jammed(site)) accepted.push_back(site);
  return accepted;
}

}  // namespace rsalab
