#include "kpzlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kpzlab {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need >= 2 points");
  double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size() - 1);
}

double normal_upper_tail(double s) {
  return 0.5 * std::erfc(s / std::sqrt(2.0));
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    sign = -sign;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  int i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    double x = std::min(a[i], b[j]);
    while (i < n && a[i] <= x) ++i;
    while (j < m && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

// P(sup |F_n - G_m| >= d) by counting monotone lattice paths staying inside
// the band |i/n - j/m| < d; valid in the absence of ties.
double ks_exact_p(double d, int n, int m) {
  std::vector<double> col(static_cast<std::size_t>(m) + 1, 0.0);
  // col[j] holds the (scaled) number of admissible paths reaching (i, j).
  col[0] = 1.0;
  for (int j = 1; j <= m; ++j)
    col[j] = (static_cast<double>(j) / m < d) ? col[j - 1] : 0.0;
  double scale_log = 0.0;
  for (int i = 1; i <= n; ++i) {
    std::vector<double> next(static_cast<std::size_t>(m) + 1, 0.0);
    for (int j = 0; j <= m; ++j) {
      if (std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m) >= d) continue;
      next[j] = col[j] + (j > 0 ? next[j - 1] : 0.0);
    }
    col.swap(next);
    double mx = *std::max_element(col.begin(), col.end());
    if (mx > 1e250) {
      for (double& v : col) v /= 1e250;
      scale_log += std::log(1e250);
    }
  }
  double log_admissible = col[m] > 0 ? std::log(col[m]) + scale_log
                                     : -std::numeric_limits<double>::infinity();
  double log_total = std::lgamma(n + m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m + 1.0);
  double p = 1.0 - std::exp(log_admissible - log_total);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("ks_two_sample: need >= 2 points per sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  KsResult r;
  r.n = static_cast<int>(a.size());
  r.m = static_cast<int>(b.size());
  r.statistic = ks_statistic(a, b);
  if (r.n <= 100 && r.m <= 100) {
    r.p_value = ks_exact_p(r.statistic, r.n, r.m);
  } else {
    double ne = static_cast<double>(r.n) * r.m / (r.n + r.m);
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * r.statistic;
    r.p_value = kolmogorov_q(lambda);
  }
  return r;
}

}  // namespace kpzlab
