#include "rsalab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rsalab/rng.hpp"

namespace rsalab {

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double s = 0.0;
  for (const double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1)
    out.se = std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
  return out;
}

double sample_variance(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(n - 1);
}

namespace {

// Central moments m2, m3, m4 about the sample mean.
void central_moments(const std::vector<double>& xs, double& m2, double& m3,
                     double& m4) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= n;
  m2 = m3 = m4 = 0.0;
  for (const double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
}

}  // namespace

double sample_skewness(const std::vector<double>& xs) {
  if (xs.size() < 3) return 0.0;
  double m2, m3, m4;
  central_moments(xs, m2, m3, m4);
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

double sample_excess_kurtosis(const std::vector<double>& xs) {
  if (xs.size() < 4) return 0.0;
  double m2, m3, m4;
  central_moments(xs, m2, m3, m4);
  if (m2 <= 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

double sample_covariance(const std::vector<double>& xs,
                         const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("sample_covariance: need matched samples");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += (xs[i] - mx) * (ys[i] - my);
  return s / (n - 1.0);
}

double covariance_se(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  const double vx = sample_variance(xs);
  const double vy = sample_variance(ys);
  const double c = sample_covariance(xs, ys);
  const auto n = static_cast<double>(xs.size());
  return std::sqrt(std::max(0.0, vx * vy + c * c) / n);
}

LinearFit linear_fit(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 matched points");
  LinearFit out;
  out.n = xs.size();
  const auto n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate xs");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return out;
}

DecayFit fit_exponential_decay(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] > 0.0) {
      fx.push_back(xs[i]);
      fy.push_back(std::log(ys[i]));
    }
  }
  if (fx.size() < 3)
    throw std::invalid_argument(
        "fit_exponential_decay: need >= 3 positive points");
  const LinearFit lf = linear_fit(fx, fy);
  DecayFit out;
  out.rate = -lf.slope;
  out.amplitude = std::exp(lf.intercept);
  out.r_squared = lf.r_squared;
  out.fit_lo = *std::min_element(fx.begin(), fx.end());
  out.fit_hi = *std::max_element(fx.begin(), fx.end());
  out.n_used = fx.size();
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  // Acklam's rational approximation, |relative error| < 1.2e-9.
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

namespace {

// Lanczos log-gamma.
double log_gamma(double x) { return std::lgamma(x); }

double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int k = 1; k < 500; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

double gamma_q_contfrac(double a, double x) {
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - log_gamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi_square_tail(double statistic, int dof) {
  return gamma_q(dof / 2.0, statistic / 2.0);
}

double poisson_pmf(int k, double mean) {
  return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

GofResult chi_square_poisson_test(const std::vector<std::uint64_t>& counts,
                                  double mean) {
  if (counts.empty())
    throw std::invalid_argument("chi_square_poisson_test: empty sample");
  const auto n = static_cast<double>(counts.size());
  std::uint64_t max_count = 0;
  for (const auto c : counts) max_count = std::max(max_count, c);

  // Expected counts per value, pooling the right tail (and any sparse left
  // cells) so every cell expects at least ~5.
  std::vector<double> expected;
  std::vector<double> observed(max_count + 1, 0.0);
  for (const auto c : counts) observed[c] += 1.0;
  std::vector<double> probs(max_count + 1, 0.0);
  double tail = 1.0;
  for (std::uint64_t k = 0; k <= max_count; ++k) {
    probs[k] = poisson_pmf(static_cast<int>(k), mean);
    tail -= probs[k];
  }

  std::vector<double> obs_binned, exp_binned;
  double acc_obs = 0.0, acc_exp = 0.0;
  for (std::uint64_t k = 0; k <= max_count; ++k) {
    acc_obs += observed[k];
    acc_exp += n * probs[k];
    if (acc_exp >= 5.0) {
      obs_binned.push_back(acc_obs);
      exp_binned.push_back(acc_exp);
      acc_obs = acc_exp = 0.0;
    }
  }
  // Remaining mass beyond max_count joins the final pooled cell.
  acc_exp += n * std::max(0.0, tail);
  if (!obs_binned.empty()) {
    obs_binned.back() += acc_obs;
    exp_binned.back() += acc_exp;
  } else {
    obs_binned.push_back(acc_obs);
    exp_binned.push_back(acc_exp);
  }

  GofResult out;
  out.dof = static_cast<int>(obs_binned.size()) - 1;
  if (out.dof < 1) {
    out.p_value = 1.0;
    return out;
  }
  for (std::size_t i = 0; i < obs_binned.size(); ++i) {
    const double d = obs_binned[i] - exp_binned[i];
    out.statistic += d * d / exp_binned[i];
  }
  out.p_value = chi_square_tail(out.statistic, out.dof);
  return out;
}

namespace {

double ks_statistic_against(const std::vector<double>& sorted,
                            double (*cdf)(double, double), double param) {
  const auto n = static_cast<double>(sorted.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i], param);
    dmax = std::max(dmax, std::abs(f - static_cast<double>(i) / n));
    dmax = std::max(dmax, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return dmax;
}

double kolmogorov_tail(double lambda) {
  // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_test(std::vector<double> xs, double (*cdf)(double, double),
                 double param) {
  if (xs.size() < 5) throw std::invalid_argument("ks_test: sample too small");
  std::sort(xs.begin(), xs.end());
  KsResult out;
  out.statistic = ks_statistic_against(xs, cdf, param);
  const double n = std::sqrt(static_cast<double>(xs.size()));
  out.p_value = kolmogorov_tail((n + 0.12 + 0.11 / n) * out.statistic);
  return out;
}

double exponential_cdf(double x, double rate) {
  return x <= 0.0 ? 0.0 : -std::expm1(-rate * x);
}

namespace {

double standardized_ks(std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= n;
  double sd = 0.0;
  for (const double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / (n - 1.0));
  if (sd == 0.0) return 1.0;
  std::sort(xs.begin(), xs.end());
  double dmax = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf((xs[i] - mean) / sd);
    dmax = std::max(dmax, std::abs(f - static_cast<double>(i) / n));
    dmax = std::max(dmax, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return dmax;
}

}  // namespace

double ks_statistic_fitted_normal(std::vector<double> xs) {
  if (xs.size() < 5)
    throw std::invalid_argument("ks_statistic_fitted_normal: too small");
  return standardized_ks(xs);
}

double lilliefors_p_value(const std::vector<double>& xs, std::uint64_t sim_seed,
                          int n_sim) {
  std::vector<double> copy = xs;
  const double observed = ks_statistic_fitted_normal(std::move(copy));
  // Null distribution of the fitted-parameter KS statistic for this n.
  const std::size_t n = xs.size();
  int exceed = 0;
  std::vector<double> sim(n);
  for (int s = 0; s < n_sim; ++s) {
    CounterRng rng(chain(sim_seed, static_cast<std::uint64_t>(s)));
    for (auto& v : sim) {
      double u = rng.next_unit();
      if (u <= 0.0) u = 0.5 / 9007199254740992.0;
      v = normal_quantile(u);
    }
    if (standardized_ks(sim) >= observed) ++exceed;
  }
  return (exceed + 1.0) / (n_sim + 1.0);
}

AdResult anderson_darling_normal(std::vector<double> xs) {
  const std::size_t n = xs.size();
  if (n < 8)
    throw std::invalid_argument("anderson_darling_normal: need n >= 8");
  const auto nd = static_cast<double>(n);
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= nd;
  double sd = 0.0;
  for (const double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / (nd - 1.0));
  AdResult out;
  if (sd == 0.0) {
    out.p_value = 0.0;
    return out;
  }
  std::sort(xs.begin(), xs.end());
  double a2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fi = normal_cdf((xs[i] - mean) / sd);
    fi = std::clamp(fi, 1e-300, 1.0 - 1e-16);
    const double fj = std::clamp(
        normal_cdf((xs[n - 1 - i] - mean) / sd), 1e-300, 1.0 - 1e-16);
    a2 += (2.0 * static_cast<double>(i) + 1.0) *
          (std::log(fi) + std::log1p(-fj));
  }
  a2 = -nd - a2 / nd;
  out.a_squared = a2;
  // Case 3 (both parameters estimated) small-sample correction and p-value
  // approximation of D'Agostino & Stephens.
  const double astar = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
  out.a_squared_star = astar;
  double p;
  if (astar >= 0.6)
    p = std::exp(1.2937 - 5.709 * astar + 0.0186 * astar * astar);
  else if (astar > 0.34)
    p = std::exp(0.9177 - 4.279 * astar - 1.38 * astar * astar);
  else if (astar > 0.2)
    p = 1.0 - std::exp(-8.318 + 42.796 * astar - 59.938 * astar * astar);
  else
    p = 1.0 - std::exp(-13.436 + 101.14 * astar - 223.73 * astar * astar);
  out.p_value = std::clamp(p, 0.0, 1.0);
  return out;
}

double ball_volume(int dimension, double radius) {
  const double d = dimension;
  return std::pow(std::numbers::pi, d / 2.0) /
         std::tgamma(d / 2.0 + 1.0) * std::pow(radius, d);
}

double shell_volume(int dimension, double r_lo, double r_hi) {
  return ball_volume(dimension, r_hi) - ball_volume(dimension, r_lo);
}

}  // namespace rsalab
