#pragma once

#include <span>
#include <vector>

namespace kpzlab {

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

/// Standard normal upper tail P(N >= s), via erfc.
double normal_upper_tail(double s);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n = 0;
  int m = 0;
};

/// Two-sample Kolmogorov-Smirnov test. Exact path-counting p-value when both
/// samples have at most 100 points, asymptotic Kolmogorov distribution beyond.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Survival function of the Kolmogorov distribution, Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_q(double lambda);

}  // namespace kpzlab
