#include "kpzlab/stochastic.hpp"

#include <limits>

namespace kpzlab {

Path sample_bridge(const TimeGrid& grid, double x, double y, CounterRng& rng) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw std::invalid_argument("sample_bridge: endpoints must be finite");
  Eigen::VectorXd v(grid.m + 1);
  v(0) = x;
  v(grid.m) = y;
  const double dt = grid.dt();
  // Next node is Gaussian given the current node and the pinned terminal value.
  for (int j = 1; j < grid.m; ++j) {
    double remaining = grid.b - grid.node(j - 1);
    double mean = v(j - 1) + (y - v(j - 1)) * dt / remaining;
    double var = dt * (remaining - dt) / remaining;
    v(j) = mean + std::sqrt(var) * rng.normal();
  }
  return Path(grid, std::move(v));
}

Path sample_bridge(const TimeGrid& grid, double x, double y, const Seed& seed) {
  CounterRng rng(seed);
  return sample_bridge(grid, x, y, rng);
}

std::pair<double, double> gaussian_tail_bounds(double s) {
  if (s < 0) throw std::invalid_argument("gaussian_tail_bounds: need s >= 0");
  const double inv_sqrt_2pi = 0.3989422804014326779399461;
  double e = std::exp(-0.5 * s * s);
  double lower = inv_sqrt_2pi * (s / (s * s + 1.0)) * e;
  double upper = s == 0.0 ? std::numeric_limits<double>::infinity()
                          : inv_sqrt_2pi * e / s;
  return {lower, upper};
}

double downcross_bound(double s, double r, double M) {
  if (!(s > 0)) throw std::invalid_argument("downcross_bound: need s > 0");
  if (!(r > 0 && r < s)) throw std::invalid_argument("downcross_bound: need 0 < r < s");
  if (!(M > 0)) throw std::invalid_argument("downcross_bound: need M > 0");
  const double inv_sqrt_pi = 0.5641895835477562869480795;
  return 16.0 * inv_sqrt_pi * (s / (std::sqrt(r) * M)) * std::exp(-M * M / (16.0 * r));
}

ParabolaCrossingReport parabola_crossing_check(double c, double s, int n_samples,
                                               const Seed& seed, int m_per_side) {
  if (!(c > 0)) throw std::invalid_argument("parabola_crossing_check: need c > 0");
  if (!(s >= 1)) throw std::invalid_argument("parabola_crossing_check: need s >= 1");
  if (n_samples < 2) throw std::invalid_argument("parabola_crossing_check: need n_samples >= 2");
  const double half_window = 8.0;
  const double dt = half_window / m_per_side;
  const double sd = std::sqrt(dt);
  int hits = 0;
  for (int k = 0; k < n_samples; ++k) {
    CounterRng rng(seed.with_replicate(static_cast<std::uint64_t>(k)));
    bool crossed = false;
    // Two independent one-sided motions from the origin.
    for (int side = 0; side < 2 && !crossed; ++side) {
      double b = 0.0;
      for (int j = 1; j <= m_per_side; ++j) {
        b += sd * rng.normal();
        double x = j * dt;
        if (b > s + c * x * x) {
          crossed = true;
          break;
        }
      }
    }
    if (crossed) ++hits;
  }
  ParabolaCrossingReport rep;
  rep.n_samples = n_samples;
  rep.probability = static_cast<double>(hits) / n_samples;
  rep.standard_error =
      std::sqrt(rep.probability * (1.0 - rep.probability) / n_samples);
  return rep;
}

}  // namespace kpzlab
