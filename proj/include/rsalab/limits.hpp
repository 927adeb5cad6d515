#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsalab/correlation.hpp"
#include "rsalab/field.hpp"
#include "rsalab/geometry.hpp"
#include "rsalab/stats.hpp"

namespace rsalab {

enum class SampleMode { infinite_volume, finite_volume };

std::string to_string(SampleMode mode);

// One replicate of the rescaled measure vector over a box family: raw
// measures of the scaled boxes, and after pooling, the centered values
// divided by lambda^{d/2}.
struct RescaledVectorSample {
  double lambda = 1.0;
  SampleMode mode = SampleMode::infinite_volume;
  std::uint64_t replicate_seed = 0;
  std::vector<Region> boxes;
  std::vector<double> raw;             // counts (packing) or weights (graphs)
  std::vector<double> mean_estimate;   // pooled means used for centering
  std::vector<double> centered_scaled;
  int dimension = 1;
};

// Accepted-point counts of the packing process in the scaled boxes.
// Infinite mode packs the union window of the exact infinite process;
// finite mode packs the input restricted to lambda*A. Lattice fields count
// jammed sites instead.
RescaledVectorSample rescaled_sample(const CellField& field, SampleMode mode,
                                     double lambda,
                                     const std::vector<Region>& boxes,
                                     const std::optional<Region>& A = {});

// Pools empirical means across replicates and fills the centered values.
void center_samples(std::vector<RescaledVectorSample>& samples);

struct BoxStats {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_p = 0.0;  // Lilliefors (simulated null)
  double ad_p = 0.0;  // Anderson-Darling
  double variance = 0.0;
};

struct GaussianityReport {
  std::vector<BoxStats> per_box;
  std::vector<std::vector<double>> empirical_cov;
  std::vector<std::vector<double>> empirical_cov_se;
  std::vector<std::vector<double>> predicted_cov;  // C * vol(B_i cap B_j)
  double c_estimate = 0.0;
  double max_rel_deviation = 0.0;  // entries with nonzero prediction
  double zero_pred_max_z = 0.0;    // |cov|/se on zero-prediction entries
  std::size_t n_replicates = 0;
  double lambda = 1.0;
};

// Normality and covariance-kernel diagnostics for a replicate set with a
// common lambda and box family. Requires >= 200 replicates.
GaussianityReport gaussianity_report(
    const std::vector<RescaledVectorSample>& samples, double c_estimate);

// Moment statistics and normality tests of synthetic per-box vectors
// (already centered); used for calibrating the report against known inputs.
GaussianityReport gaussianity_report_from_vectors(
    const std::vector<std::vector<double>>& vectors,
    const std::vector<Region>& boxes, double lambda, double c_estimate);

// Coupled finite-vs-infinite discrepancy on one realization: points
// accepted by exactly one of the two processes on lambda*A, with their
// clearances from the window boundary.
struct BoundaryDiff {
  std::vector<SpaceTimePoint> plus_points;   // finite-only acceptances
  std::vector<SpaceTimePoint> minus_points;  // infinite-only acceptances
  std::vector<double> plus_boundary_distance;
  std::vector<double> minus_boundary_distance;

  std::size_t plus_count() const { return plus_points.size(); }
  std::size_t minus_count() const { return minus_points.size(); }
};

BoundaryDiff boundary_processes(const CellField& field, double lambda,
                                const Region& A);

struct ScalingFit {
  std::vector<double> log_lambda;
  std::vector<double> log_statistic;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct BoundaryScaling {
  std::vector<double> lambdas;
  std::vector<double> mean_plus, var_plus;
  std::vector<double> mean_minus, var_minus;
  ScalingFit mean_plus_fit, var_plus_fit;
  ScalingFit mean_minus_fit, var_minus_fit;
  std::vector<double> dropped_lambdas;  // zero-count grid points
};

// Least-squares slopes of log mean and log variance of the boundary
// discrepancy counts against log lambda.
BoundaryScaling boundary_scaling(const CellField& proto,
                                 const std::vector<double>& lambdas,
                                 const Region& A, int replicates);

struct ConeTailResult {
  std::vector<double> r_grid;
  std::vector<double> escape_probability;
  std::vector<double> escape_se;
  std::vector<std::uint64_t> escape_counts;
  std::vector<std::uint8_t> censored;  // zero escapes observed
  DecayFit fit;                        // over uncensored grid points
  bool fit_valid = false;
  std::size_t n_samples = 0;
};

// Empirical tail of the causal-cone extent: per sampled field point,
// whether its causal cone escapes {(y,t): ||x-y|| <= beta |t_x-t_y| + R}
// for each R in the grid.
ConeTailResult cone_tail(const CellField& proto,
                         const std::vector<double>& r_grid, double beta,
                         int n_samples);

}  // namespace rsalab
