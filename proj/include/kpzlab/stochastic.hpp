#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "kpzlab/rng.hpp"

namespace kpzlab {

/// Uniform grid of m+1 nodes on [a,b].
struct TimeGrid {
  double a = 0.0;
  double b = 1.0;
  int m = 1;

  TimeGrid() = default;
  TimeGrid(double a_, double b_, int m_) : a(a_), b(b_), m(m_) {
    if (!(a < b)) throw std::invalid_argument("TimeGrid: need a < b");
    if (m < 1) throw std::invalid_argument("TimeGrid: need m >= 1");
  }

  double dt() const { return (b - a) / m; }
  double node(int j) const { return a + j * dt(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// One continuous curve sampled on a TimeGrid (piecewise linear between nodes).
struct Path {
  TimeGrid grid;
  Eigen::VectorXd values;  // length grid.m + 1

  Path() = default;
  Path(TimeGrid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.m + 1)
      throw std::invalid_argument("Path: values.length must be m+1");
  }

  static Path constant(const TimeGrid& g, double c) {
    return Path(g, Eigen::VectorXd::Constant(g.m + 1, c));
  }
};

/// Brownian bridge from (grid.a, x) to (grid.b, y), diffusion parameter 1,
/// exact finite-dimensional law by sequential conditioning.
Path sample_bridge(const TimeGrid& grid, double x, double y, const Seed& seed);
Path sample_bridge(const TimeGrid& grid, double x, double y, CounterRng& rng);

/// Lower/upper sandwich for P(N >= s), standard normal. Upper is +inf at s=0.
std::pair<double, double> gaussian_tail_bounds(double s);

/// Upper bound on the probability that Brownian motion on [0,s] drops by M
/// within some sub-window of length r.
double downcross_bound(double s, double r, double M);

struct ParabolaCrossingReport {
  double probability = 0.0;
  double standard_error = 0.0;
  int n_samples = 0;
};

/// Empirical probability that a discretized two-sided Brownian motion exceeds
/// s + c x^2 anywhere on the truncation window [-8, 8].
ParabolaCrossingReport parabola_crossing_check(double c, double s, int n_samples,
                                               const Seed& seed, int m_per_side = 4096);

}  // namespace kpzlab
