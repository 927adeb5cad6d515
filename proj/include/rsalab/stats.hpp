#pragma once

#include <cstdint>
#include <vector>

namespace rsalab {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // unbiased
double sample_skewness(const std::vector<double>& xs);
double sample_excess_kurtosis(const std::vector<double>& xs);
double sample_covariance(const std::vector<double>& xs,
                         const std::vector<double>& ys);
// Approximate standard error of the sample covariance (delta method).
double covariance_se(const std::vector<double>& xs,
                     const std::vector<double>& ys);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

LinearFit linear_fit(const std::vector<double>& xs,
                     const std::vector<double>& ys);

// Exponential decay fit on positive data: least squares of log(y) vs x.
struct DecayFit {
  double rate = 0.0;       // y ~ amplitude * exp(-rate * x)
  double amplitude = 0.0;
  double r_squared = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  std::size_t n_used = 0;
};

DecayFit fit_exponential_decay(const std::vector<double>& xs,
                               const std::vector<double>& ys);

// --- distributions ----------------------------------------------------------

double normal_cdf(double z);
double normal_quantile(double p);  // inverse CDF, p in (0, 1)

// Regularized upper incomplete gamma Q(a, x); chi-square tail is
// Q(k/2, x/2).
double gamma_q(double a, double x);
double chi_square_tail(double statistic, int dof);
double poisson_pmf(int k, double mean);

// --- hypothesis tests -------------------------------------------------------

// Chi-square goodness of fit of integer counts against Poisson(mean).
// Bins with small expectation are pooled into the tails.
struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

GofResult chi_square_poisson_test(const std::vector<std::uint64_t>& counts,
                                  double mean);

// One-sample Kolmogorov-Smirnov test against a fully specified CDF
// (asymptotic p-value).
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

KsResult ks_test(std::vector<double> xs, double (*cdf)(double, double),
                 double param);
double exponential_cdf(double x, double rate);

// KS statistic against a normal with estimated mean/sd.
double ks_statistic_fitted_normal(std::vector<double> xs);

// Lilliefors test: KS with estimated parameters, null distribution obtained
// by internal simulation (deterministic given `sim_seed`).
double lilliefors_p_value(const std::vector<double>& xs,
                          std::uint64_t sim_seed = 0x4c696c6c69ull,
                          int n_sim = 2000);

// Anderson-Darling normality test with estimated parameters
// (case-3 small-sample correction and standard p-value approximation).
struct AdResult {
  double a_squared = 0.0;
  double a_squared_star = 0.0;
  double p_value = 0.0;
};

AdResult anderson_darling_normal(std::vector<double> xs);

// d-dimensional ball volume and the volume of a spherical shell.
double ball_volume(int dimension, double radius);
double shell_volume(int dimension, double r_lo, double r_hi);

}  // namespace rsalab
