#include "kpzlab/spectra.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace kpzlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Ai(x) = e^{-z}/(pi x^{1/4}) * int_0^inf e^{-v^2} cos(v^3/(3 x^{3/4})) dv,
// z = (2/3) x^{3/2}; the exponential scale is factored out exactly.
double airy_positive(double x) {
  static const Quadrature q = composite_gauss(0.0, 7.0, 12, 0.25);
  const double x14 = std::pow(x, 0.25);
  const double inv_phase = 1.0 / (3.0 * x14 * x14 * x14);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) {
    double v = q.nodes(i);
    sum += q.weights(i) * std::exp(-v * v) * std::cos(v * v * v * inv_phase);
  }
  double z = (2.0 / 3.0) * x * std::sqrt(x);
  return std::exp(-z) * sum / (kPi * x14);
}

// Maclaurin series Ai = c1 f - c2 g with Kahan-compensated accumulation.
double airy_series(double x) {
  const double c1 = 0.35502805388781723926;  // 3^{-2/3} / Gamma(2/3)
  const double c2 = 0.25881940379280679841;  // 3^{-1/3} / Gamma(1/3)
  const double x3 = x * x * x;
  double f = 1.0, fc = 0.0, tf = 1.0;
  double g = x, gc = 0.0, tg = x;
  for (int k = 1; k < 200; ++k) {
    tf *= x3 / ((3.0 * k) * (3.0 * k - 1.0));
    tg *= x3 / ((3.0 * k + 1.0) * (3.0 * k));
    double y = tf - fc;
    double t = f + y;
    fc = (t - f) - y;
    f = t;
    y = tg - gc;
    t = g + y;
    gc = (t - g) - y;
    g = t;
    if (std::abs(tf) < 1e-20 && std::abs(tg) < 1e-20) break;
  }
  return c1 * f - c2 * g;
}

// Oscillatory asymptotic expansion for x <= -7.5, truncated at the smallest
// term.
double airy_negative(double x) {
  const double z = -x;
  const double zeta = (2.0 / 3.0) * z * std::sqrt(z);
  std::vector<double> u{1.0};
  for (int k = 1; k <= 40; ++k) {
    double prev = u.back();
    double next = prev * (6.0 * k - 1.0) * (6.0 * k - 3.0) * (6.0 * k - 5.0) /
                  (216.0 * k * (2.0 * k - 1.0));
    u.push_back(next);
    if (next / std::pow(zeta, k) > prev / std::pow(zeta, k - 1)) break;
  }
  double p = 0.0, qsum = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k < u.size(); ++k) {
    double term = u[2 * k] / std::pow(zeta, 2.0 * static_cast<double>(k));
    if (std::abs(term) > best) break;
    best = std::abs(term);
    p += (k % 2 == 0 ? term : -term);
  }
  best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < u.size(); ++k) {
    double term = u[2 * k + 1] / std::pow(zeta, 2.0 * static_cast<double>(k) + 1.0);
    if (std::abs(term) > best) break;
    best = std::abs(term);
    qsum += (k % 2 == 0 ? term : -term);
  }
  double phase = zeta + 0.25 * kPi;
  return (std::sin(phase) * p - std::cos(phase) * qsum) /
         (std::sqrt(kPi) * std::pow(z, 0.25));
}

}  // namespace

double airy_ai(double x) {
  if (x >= 1.2) return airy_positive(x);
  if (x > -7.5) return airy_series(x);
  return airy_negative(x);
}

namespace {

// det(I - W^{1/2} K W^{1/2}) for a kernel already tabulated on the nodes.
template <typename Scalar>
Scalar det_from_matrix(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& k,
                       const Eigen::VectorXd& w) {
  const Eigen::Index n = k.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = -std::sqrt(w(i) * w(j)) * k(i, j);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) += Scalar(1);
  return Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(m)
      .determinant();
}

}  // namespace

double tracy_widom_gue_det(double s, int n_nodes) {
  if (n_nodes < 4) throw std::invalid_argument("tracy_widom_gue_det: too few nodes");
  const double lambda = 12.0 + std::abs(s);
  const Quadrature xq = gauss_legendre(n_nodes, s, s + lambda);
  const double r_max = 30.0 + std::max(0.0, -s);
  const Quadrature rq = composite_gauss(0.0, r_max, 12, 1.0);
  // Airy kernel int_0^inf Ai(x+r) Ai(y+r) dr via the factorization
  // K = A diag(w_r) A^T with A(i,k) = Ai(x_i + r_k).
  Eigen::MatrixXd a(n_nodes, rq.nodes.size());
  for (int i = 0; i < n_nodes; ++i)
    for (Eigen::Index k = 0; k < rq.nodes.size(); ++k)
      a(i, k) = airy_ai(xq.nodes(i) + rq.nodes(k));
  Eigen::MatrixXd kmat = a * rq.weights.asDiagonal() * a.transpose();
  return det_from_matrix<double>(kmat, xq.weights);
}

double tracy_widom_gue_cdf(double s, int n_nodes) {
  double d1 = tracy_widom_gue_det(s, n_nodes);
  double d2 = tracy_widom_gue_det(s, 2 * n_nodes);
  if (std::abs(d1 - d2) > 1e-6)
    throw std::runtime_error("tracy_widom_gue_cdf: quadrature not converged");
  return d2;
}

ContourSpec ContourSpec::enclosing(double r_cap, int n_nodes) {
  ContourSpec c;
  c.center = 0.5 * (r_cap + 0.2);
  c.radius = c.center + 0.3;
  c.n_nodes = n_nodes;
  return c;
}

void ContourSpec::validate() const {
  if (!(radius > 0) || n_nodes < 16)
    throw std::invalid_argument("ContourSpec: need radius > 0 and >= 16 nodes");
  if (!(center - radius < -1e-9))
    throw std::invalid_argument("ContourSpec: contour must enclose mu = 0");
  if (!(center + radius > 1.0))
    throw std::invalid_argument("ContourSpec: contour must enclose (0, 1]");
}

CrossoverResult kpz_crossover_eval(double t, double s, const ContourSpec& contour,
                                   int x_nodes_per_panel) {
  if (!(t >= 1.0)) throw std::invalid_argument("kpz_crossover_eval: need t >= 1");
  contour.validate();
  const double beta = std::cbrt(t) / std::cbrt(2.0);
  const double sp = std::cbrt(2.0) * s;  // domain left end 2^{1/3} s
  const double lambda = 12.0 + std::abs(sp);
  const Quadrature xq = composite_gauss(sp, sp + lambda, x_nodes_per_panel, 4.0);
  const double r_min = -40.0 / beta;
  const double r_max = 12.0 + std::max(0.0, -sp);
  const Quadrature rq = composite_gauss(r_min, r_max, 12, std::min(1.0, 4.0 / beta));

  // Poles of the mu integrand sit at e^{-beta r} for each r node; the
  // contour must keep a safe distance from every one of them.
  for (Eigen::Index k = 0; k < rq.nodes.size(); ++k) {
    double pole = std::exp(-beta * rq.nodes(k));
    double dist = std::abs(std::abs(pole - contour.center) - contour.radius);
    if (dist < 1e-6)
      throw std::runtime_error("kpz_crossover_eval: contour too close to a kernel pole");
  }

  const Eigen::Index nx = xq.nodes.size();
  const Eigen::Index nr = rq.nodes.size();
  Eigen::MatrixXcd b(nx, nr);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index k = 0; k < nr; ++k)
      b(i, k) = std::sqrt(xq.weights(i) * rq.weights(k)) *
                airy_ai(xq.nodes(i) + rq.nodes(k));
  Eigen::VectorXd pole_vals(nr);
  for (Eigen::Index k = 0; k < nr; ++k) pole_vals(k) = std::exp(-beta * rq.nodes(k));

  // Midpoint-offset trapezoid in the contour angle; spectrally accurate for
  // this periodic integrand. Every node is evaluated honestly so the
  // imaginary part is a genuine consistency diagnostic.
  const int n = contour.n_nodes;
  std::complex<double> total(0.0, 0.0);
  Eigen::VectorXcd phi(nr);
  Eigen::MatrixXcd m(nx, nx);
  for (int j = 0; j < n; ++j) {
    double theta = 2.0 * kPi * (j + 0.5) / n;
    std::complex<double> mu =
        contour.center + contour.radius * std::complex<double>(std::cos(theta), std::sin(theta));
    for (Eigen::Index k = 0; k < nr; ++k) phi(k) = mu / (mu - pole_vals(k));
    m.noalias() = b * phi.asDiagonal() * b.transpose();
    m = -m;
    for (Eigen::Index i = 0; i < nx; ++i) m(i, i) += 1.0;
    std::complex<double> det = Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant();
    // The simple pole of 1/mu at the origin sits deep inside the contour and
    // would dominate the trapezoid error, so its residue (= 1, since the
    // kernel vanishes at mu = 0) is added analytically and only the smooth
    // remainder (e^{-mu} det - 1)/mu is integrated numerically.
    total += (std::exp(-mu) * det - 1.0) * (mu - contour.center) / mu;
  }
  total /= static_cast<double>(n);
  total += 1.0;

  CrossoverResult res;
  res.value = total.real();
  res.imag_residual = std::abs(total.imag());
  if (res.imag_residual > 1e-4)
    throw std::runtime_error("kpz_crossover_eval: imaginary residual exceeds 1e-4");
  return res;
}

double kpz_crossover_cdf(double t, double s, const ContourSpec& contour) {
  return kpz_crossover_eval(t, s, contour).value;
}

}  // namespace kpzlab
