#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "kpzlab/rng.hpp"

namespace kpzlab {

/// Space slice of the multiplicative stochastic heat equation at time t.
/// Space grid x_j = (j - center) * dx on [-half_width, half_width]; the two
/// boundary nodes are absorbing (pinned to zero).
struct SheField {
  double dx = 0.02;
  double dt = 1e-4;
  double t = 0.0;
  double half_width = 8.0;
  int center = 0;
  Eigen::VectorXd Z;
  long long floor_count = 0;  // positivity clamps; must be 0 in accepted runs
  Seed seed;

  int size() const { return static_cast<int>(Z.size()); }
  double x(int idx) const { return (idx - center) * dx; }
  int index_of(double xq) const;
};

/// Either the delta-like narrow wedge (single site of mass 1/dx) or a height
/// function H0; H0 may return -infinity, which maps to Z = 0 exactly.
struct InitialData {
  enum class Kind { narrow_wedge, function };
  Kind kind = Kind::narrow_wedge;
  std::function<double(double)> h0;

  static InitialData narrow_wedge() { return {}; }
  static InitialData from_function(std::function<double(double)> f) {
    InitialData d;
    d.kind = Kind::function;
    d.h0 = std::move(f);
    return d;
  }
};

/// Explicit Euler scheme
///   Z(m+1,j) = Z(m,j) + (dt/(2dx^2)) (Z_{j+1} - 2Z_j + Z_{j-1})
///              + Z(m,j) xi(m,j) sqrt(dt/dx)
/// with i.i.d. standard Gaussian xi drawn from the seed in a fixed (m, j)
/// order, so two solves with equal (seed, t, grid) share the noise pathwise.
/// Requires dt <= dx^2/2. zero_noise freezes xi at 0 (heat-kernel checks).
SheField solve_mshe(const InitialData& init, double t, double dx, double dt,
                    double half_width, const Seed& seed, bool zero_noise = false);

/// Pointwise log of Z over index range [lo, hi]; throws naming the grid point
/// when a value is not strictly positive.
Eigen::VectorXd hopf_cole(const SheField& field, int lo, int hi);

/// Interior slice (skips the two absorbing boundary nodes).
Eigen::VectorXd hopf_cole(const SheField& field);

/// One sample of the one-point law at x for initial height h0, from a
/// narrow-wedge solution: log integral exp(H_nw(t,y) + h0(x-y)) dy by
/// trapezoid rule in log-sum-exp form.
double general_one_point(const SheField& nw_field,
                         const std::function<double(double)>& h0, double x);

/// Growth/mass conditions on an initial height function:
///   f(x) <= C + (1-kappa) x^2/2 everywhere tabulated, and
///   Leb{x in [-M,M] : f(x) >= -C} >= delta.
struct HypParams {
  double C = 1.0;
  double delta = 1.0;
  double kappa = 0.5;
  double M = 1.0;
};

struct HypReport {
  bool satisfied = true;
  std::optional<double> witness_x;  // growth violation location
  double measure = 0.0;             // Lebesgue estimate of {f >= -C} in [-M,M]
};

/// Tabulation of f at x0 + k dx, k = 0..values.size()-1; the tabulation must
/// cover [-M, M].
HypReport hyp_check(const Eigen::VectorXd& values, double x0, double dx,
                    const HypParams& params);

struct AttractivityReport {
  long long ordering_violations = 0;
  double sup_height_diff = 0.0;
  double sup_initial_diff = 0.0;
  double slack = 0.0;
  bool pass = true;
};

/// Solves with h0_upper >= h0_lower under identical noise and checks that the
/// ordering survives, with sup |H1 - H2| <= sup |H01 - H02| + 10 dx.
AttractivityReport attractivity_check(const std::function<double(double)>& h0_upper,
                                      const std::function<double(double)>& h0_lower,
                                      double t, double dx, double dt,
                                      double half_width, const Seed& seed);

/// Quenched endpoint mass p_j = Z(t,j) / sum_k Z(t,k); throws on zero mass.
Eigen::VectorXd endpoint_distribution(const SheField& field);

/// Smallest radius r with sum of p over |x_j| <= r at least frac.
double mass_radius(const SheField& field, const Eigen::VectorXd& p, double frac);

/// Total p-mass of the window |x - x_center| <= radius.
double window_mass(const SheField& field, const Eigen::VectorXd& p,
                   double x_center, double radius);

}  // namespace kpzlab
