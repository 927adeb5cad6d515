#pragma once

#include <cstdint>
#include <functional>

#include "rsalab/field.hpp"

namespace rsalab {

// Adaptive Simpson quadrature with absolute+relative error control.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// Mean packed density for unit-length rods arriving at unit space-time rate
// on the line, at time t (the classical kinetics integral; tends to
// 0.747598... as t -> infinity).
double renyi_rod_density(double t, double rel_tol = 1e-7);

// Expected accepted centers per unit length for the d=1 diameter-2 model at
// unit space-time input intensity, run to time tau. Equals the unit-rod
// density at doubled time, halved.
double renyi_density_oracle(double tau);

// Packs the whole realization of `field` on the box
// [-(halfwidth+margin), +(halfwidth+margin)]^d sequentially (together with
// the test point) and reads off the test point's flag. Exact whenever the
// realized backward cone stays within the margin.
bool brute_force_sigma_oracle(const CellField& field, const SpaceTimePoint& w,
                              double box_halfwidth, double margin);

}  // namespace rsalab
