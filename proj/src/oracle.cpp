#include "rsalab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsalab/packing.hpp"

namespace rsalab {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double fa, double b, double fb, double fm, double whole,
                     double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth > 48)
    throw std::runtime_error("adaptive_simpson: failed to converge");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_step(f, a, fa, m, fm, flm, left, tol / 2.0, depth + 1) +
         adaptive_step(f, m, fm, b, fb, frm, right, tol / 2.0, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adaptive_step(f, a, fa, b, fb, fm, whole, tol, 0);
}

namespace {

// g(u) = int_0^u (1 - e^{-v}) / v dv; the integrand extends continuously to
// 1 at v = 0.
double blocked_fraction_integral(double u, double tol) {
  if (u <= 0.0) return 0.0;
  const auto integrand = [](double v) {
    if (v < 1e-8) return 1.0 - v / 2.0;
    return -std::expm1(-v) / v;
  };
  return adaptive_simpson(integrand, 0.0, u, tol);
}

}  // namespace

double renyi_rod_density(double t, double rel_tol) {
  if (t <= 0.0) return 0.0;
  // Density n(t) = int_0^t exp(-2 g(u)) du. The integrand is the insertion
  // probability at time u.
  const double inner_tol = rel_tol * 1e-2;
  const auto phi = [inner_tol](double u) {
    return std::exp(-2.0 * blocked_fraction_integral(u, inner_tol));
  };
  // Absolute tolerance scaled to the integral's rough magnitude (<= min(t,1)).
  const double tol = rel_tol * std::min(t, 1.0);
  return adaptive_simpson(phi, 0.0, t, tol);
}

double renyi_density_oracle(double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("renyi_density_oracle: tau > 0 required");
  return renyi_rod_density(2.0 * tau) / 2.0;
}

bool brute_force_sigma_oracle(const CellField& field, const SpaceTimePoint& w,
                              double box_halfwidth, double margin) {
  if (field.mode != FieldMode::continuum)
    throw std::invalid_argument("brute_force_sigma_oracle: continuum only");
  Vec lo(field.dimension), hi(field.dimension);
  for (int i = 0; i < field.dimension; ++i) {
    lo[i] = w.x[i] - (box_halfwidth + margin);
    hi[i] = w.x[i] + (box_halfwidth + margin);
  }
  auto pts = sample_window(field, Region(std::move(lo), std::move(hi)));
  pts.push_back(w);
  std::sort(pts.begin(), pts.end(), arrival_less);
  const auto flags = pack_flags(pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].t == w.t && pts[i].x == w.x) return flags[i] != 0;
  return false;  // unreachable
}

}  // namespace rsalab
