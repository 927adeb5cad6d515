#pragma once

#include <cstdint>
#include <vector>

#include "rsalab/causal.hpp"
#include "rsalab/field.hpp"
#include "rsalab/packing.hpp"
#include "rsalab/stats.hpp"

namespace rsalab {

// Monte Carlo replicate fields: independent streams derived from a base
// configuration.
CellField sample_field(const CellField& proto, std::uint64_t index);
std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index);

struct ProbabilityEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t n_samples = 0;
  bool degenerate = false;  // forced zero (mutually overlapping test points)
};

// Probability that all test points are packed against an independent input
// sample. With joint_blocking, earlier accepted test points block later
// ones (the hard-core process correlation); without it, each sigma is
// evaluated against the bare input, the literal product form.
ProbabilityEstimate estimate_rbar(const std::vector<SpaceTimePoint>& tests,
                                  const CellField& proto, int n_samples,
                                  bool joint_blocking = true);

struct ProfilePoint {
  double t = 0.0;
  ProbabilityEstimate estimate;
};

// One-point correlation over a time grid at the spatial origin, common
// random numbers across the grid (hence exactly non-increasing in t).
// Continuum estimates are multiplied by the input density indicator
// 1[0 <= t <= tau].
std::vector<ProfilePoint> r1_profile(const CellField& proto,
                                     const std::vector<double>& t_grid,
                                     int n_samples);

// Exponential fit of the lattice one-point correlation decay; points within
// 2 SE of zero are dropped before taking logs.
DecayFit lattice_r1_decay(const CellField& proto,
                          const std::vector<double>& t_grid, int n_samples,
                          std::vector<ProfilePoint>* curve = nullptr);

struct BinnedCorrelation {
  std::vector<double> bin_edges;  // ascending, starting at 0
  std::vector<double> estimates;  // \hat r_2 per bin (ordered-pair density)
  std::vector<double> standard_errors;
  std::vector<std::uint64_t> pair_counts;
  double intensity = 0.0;  // \hat r_1: accepted points per unit volume
  double intensity_se = 0.0;
  int dimension = 1;
  std::size_t n_samples = 0;

  std::size_t n_bins() const { return estimates.size(); }
  bool bin_empty(std::size_t b) const { return pair_counts[b] == 0; }
};

// Two-point spatial correlation of edge-effect-free samples over a common
// window, minus-sampling edge correction: a point is a reference for a bin
// only when the whole bin shell around it lies inside the window.
BinnedCorrelation spatial_pair_correlation(
    const std::vector<PackedSample>& samples,
    const std::vector<double>& bin_edges);

struct CorrCEstimate {
  double value = 0.0;
  double truncation_error = 0.0;  // estimated tail mass beyond the last bin
  double intensity = 0.0;
};

// Covariance constant by bin quadrature: integral of (r2 - r1^2) plus r1.
CorrCEstimate estimate_C_corr(const BinnedCorrelation& corr);

struct VarCEstimate {
  double value = 0.0;  // at the largest lambda
  std::vector<double> lambdas;
  std::vector<double> normalized_variance;  // Var[count]/(lambda^d vol(B))
};

// Covariance constant from the variance of accepted counts in scaled boxes.
VarCEstimate estimate_C_var(const std::vector<double>& lambdas,
                            const std::vector<std::vector<double>>& counts,
                            int dimension, double box_volume);

struct MomentPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Quadrature of the moment formulas from estimated correlation curves:
// mean from the time profile, variance from the spatial pair correlation
// with the product-of-intensities integrand.
MomentPrediction moments_from_correlations(const std::vector<double>& t_grid,
                                           const std::vector<double>& r1_of_t,
                                           const BinnedCorrelation& r2,
                                           const Region& region);

struct ClusteringGapPoint {
  double separation = 0.0;
  double rbar_joint = 0.0;       // \hat rbar_{k+l}
  double rbar_product = 0.0;     // \hat rbar_k * \hat rbar_l
  double gap = 0.0;              // |joint - product|
  double gap_se = 0.0;
  double cone_intersect_prob = 0.0;  // \hat P[E^c]: some cross pair of
  double cone_intersect_se = 0.0;    // backward cones intersects
  bool below_noise_floor = false;    // gap within 2 SE of zero
};

struct ClusteringGapResult {
  std::vector<ClusteringGapPoint> points;
  DecayFit gap_fit;   // over points above the noise floor
  DecayFit cone_fit;  // over separations with positive intersection rate
  bool gap_fit_valid = false;
  bool cone_fit_valid = false;
};

// Factorization gap of the packing probabilities for two test tuples, the
// second translated along the first axis by each separation, plus the
// backward-cone intersection frequency that bounds it.
ClusteringGapResult clustering_gap(const std::vector<SpaceTimePoint>& k_tuple,
                                   const std::vector<SpaceTimePoint>& l_tuple,
                                   const std::vector<double>& separations,
                                   const CellField& proto, int n_samples);

}  // namespace rsalab
