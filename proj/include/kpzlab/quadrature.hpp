#pragma once

#include <Eigen/Core>

namespace kpzlab {

/// Nodes and weights of a quadrature rule on some interval.
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
Quadrature gauss_legendre(int n);

/// Gauss-Legendre rule mapped onto [a, b].
Quadrature gauss_legendre(int n, double a, double b);

/// Composite rule: [a, b] split into equal panels of width <= max_panel,
/// with an n-point Gauss-Legendre rule on each.
Quadrature composite_gauss(double a, double b, int n_per_panel, double max_panel);

}  // namespace kpzlab
