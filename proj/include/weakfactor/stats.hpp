#pragma once

#include <vector>

#include "weakfactor/types.hpp"

namespace weakfactor {

/// Standard normal CDF, accurate to machine precision via erfc.
double normal_cdf(double x);

/// Standard normal quantile: rational initial guess polished by Newton
/// steps on the erfc-based CDF; accurate to ~1e-15 on (0,1).
double normal_quantile(double p);

/// One-sample Kolmogorov-Smirnov statistic against the standard normal.
double ks_statistic_normal(std::vector<double> draws);

double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);
double skewness(const std::vector<double>& xs);
double excess_kurtosis(const std::vector<double>& xs);
double median(std::vector<double> xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Least squares y on x; stderr is the usual OLS slope standard error
/// (0 when there are only two points).
LineFit least_squares(const std::vector<double>& x,
                      const std::vector<double>& y);

}  // namespace weakfactor
