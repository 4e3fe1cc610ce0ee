#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <complex>
#include <functional>
#include <stdexcept>

#include "kpzlab/quadrature.hpp"

namespace kpzlab {

/// Airy function of the first kind. Maclaurin series on the middle range, a
/// damped-oscillation integral representation for large positive x, and the
/// oscillatory asymptotic expansion for large negative x.
double airy_ai(double x);

/// Integral operator restricted to quadrature nodes on (s, s + Lambda).
template <typename Scalar>
struct QuadratureKernel {
  Quadrature rule;
  std::function<Scalar(double, double)> eval;
};

/// det(I - W^{1/2} K W^{1/2}) over the node matrix (symmetrized Nystrom).
template <typename Scalar>
Scalar fredholm_det(const QuadratureKernel<Scalar>& kernel) {
  const Eigen::Index n = kernel.rule.nodes.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Scalar v = kernel.eval(kernel.rule.nodes(i), kernel.rule.nodes(j));
      if (!std::isfinite(std::abs(v)))
        throw std::runtime_error("fredholm_det: non-finite kernel value");
      m(i, j) = -std::sqrt(kernel.rule.weights(i) * kernel.rule.weights(j)) * v;
    }
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) += Scalar(1);
  return Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(m)
      .determinant();
}

/// Tracy-Widom GUE distribution F2(s): Fredholm determinant of the Airy
/// kernel on (s, infinity), truncated at length 12 + |s|. Evaluated at
/// n_nodes and 2*n_nodes; throws if the two disagree by more than 1e-6.
double tracy_widom_gue_cdf(double s, int n_nodes = 80);

/// Single-resolution evaluation (used by the self-check and by tests).
double tracy_widom_gue_det(double s, int n_nodes);

/// Closed circular contour in the complex mu plane enclosing [0, r_cap].
/// Residues of poles beyond r_cap are suppressed by e^{-mu}, so r_cap around
/// 36 reproduces the infinite contour to below 1e-10.
struct ContourSpec {
  double center = 18.2;
  double radius = 18.5;
  int n_nodes = 320;

  static ContourSpec enclosing(double r_cap = 36.0, int n_nodes = 320);
  void validate() const;
};

struct CrossoverResult {
  double value = 0.0;
  double imag_residual = 0.0;  // |Im| of the contour integral; diagnostic
};

/// One-point crossover distribution at time t >= 1:
///   F_t(s) = (1/2 pi i) contour-int (dmu/mu) e^{-mu} det(I - K_mu) on
/// L^2(2^{1/3} s, infinity), with
///   K_mu(x,y) = int mu/(mu - e^{-beta r}) Ai(x+r) Ai(y+r) dr,
/// beta = 2^{-1/3} t^{1/3}. Throws when the imaginary residual exceeds 1e-4
/// or the contour passes too close to a kernel pole.
CrossoverResult kpz_crossover_eval(double t, double s, const ContourSpec& contour,
                                   int x_nodes_per_panel = 16);
double kpz_crossover_cdf(double t, double s,
                         const ContourSpec& contour = ContourSpec());

}  // namespace kpzlab
