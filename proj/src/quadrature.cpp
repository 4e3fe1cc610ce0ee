#include "kpzlab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace kpzlab {

Quadrature gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence: p = P_n(x), dp = P_n'(x)
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double p = (n == 1) ? x : p1;
      double pm = (n == 1) ? 1.0 : p0;
      dp = n * (x * p - pm) / (x * x - 1.0);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes(n - 1 - i) = x;
    q.weights(n - 1 - i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

Quadrature gauss_legendre(int n, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: need a < b");
  Quadrature base = gauss_legendre(n);
  Quadrature q;
  q.nodes = 0.5 * (b - a) * base.nodes.array() + 0.5 * (a + b);
  q.weights = 0.5 * (b - a) * base.weights;
  return q;
}

Quadrature composite_gauss(double a, double b, int n_per_panel, double max_panel) {
  if (!(a < b)) throw std::invalid_argument("composite_gauss: need a < b");
  if (!(max_panel > 0)) throw std::invalid_argument("composite_gauss: need max_panel > 0");
  int panels = static_cast<int>(std::ceil((b - a) / max_panel));
  Quadrature base = gauss_legendre(n_per_panel);
  Quadrature q;
  q.nodes.resize(panels * n_per_panel);
  q.weights.resize(panels * n_per_panel);
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    for (int i = 0; i < n_per_panel; ++i) {
      q.nodes(p * n_per_panel + i) = lo + 0.5 * h * (base.nodes(i) + 1.0);
      q.weights(p * n_per_panel + i) = 0.5 * h * base.weights(i);
    }
  }
  return q;
}

}  // namespace kpzlab
