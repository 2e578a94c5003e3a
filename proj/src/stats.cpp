#include "weakfactor/stats.hpp"

#include <algorithm>
#include <cmath>

namespace weakfactor {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation, ~1.15e-9 relative error.
double normal_quantile_seed(double p) {
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
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double s = q * q;
  return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) *
         q /
         (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0,1), got " +
                                std::to_string(p));
  }
  double x = normal_quantile_seed(p);
  for (int iter = 0; iter < 2; ++iter) {
    const double err = normal_cdf(x) - p;
    const double pdf = normal_pdf(x);
    if (pdf <= 0.0) break;
    x -= err / pdf;
  }
  return x;
}

double ks_statistic_normal(std::vector<double> draws) {
  std::sort(draws.begin(), draws.end());
  const auto n = static_cast<double>(draws.size());
  double d = 0.0;
  for (size_t i = 0; i < draws.size(); ++i) {
    const double f = normal_cdf(draws[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(f - lo, hi - f));
  }
  return d;
}

double sample_mean(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  const double mu = sample_mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(xs.size() - 1);
}

namespace {
double central_moment(const std::vector<double>& xs, int k) {
  const double mu = sample_mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += std::pow(x - mu, k);
  return acc / static_cast<double>(xs.size());
}
}  // namespace

double skewness(const std::vector<double>& xs) {
  const double m2 = central_moment(xs, 2);
  return central_moment(xs, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(const std::vector<double>& xs) {
  const double m2 = central_moment(xs, 2);
  return central_moment(xs, 4) / (m2 * m2) - 3.0;
}

double median(std::vector<double> xs) {
  const size_t n = xs.size();
  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  double hi = xs[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + n / 2 - 1, xs.end());
  return 0.5 * (hi + xs[n / 2 - 1]);
}

LineFit least_squares(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const size_t n = x.size();
  if (n != y.size() || n < 2) {
    throw TooFewGridPoints("least squares needs at least two points");
  }
  const double xbar = sample_mean(x);
  const double ybar = sample_mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  if (n > 2) {
    double rss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double resid = y[i] - fit.intercept - fit.slope * x[i];
      rss += resid * resid;
    }
    fit.stderr_slope = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

}  // namespace weakfactor
