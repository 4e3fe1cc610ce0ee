#include "kpzlab/she.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace kpzlab {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

int SheField::index_of(double xq) const {
  double raw = xq / dx;
  int off = static_cast<int>(std::lround(raw));
  int idx = center + off;
  if (idx < 0 || idx >= size() || std::abs(raw - off) > 1e-9)
    throw std::invalid_argument("SheField: x is off-grid");
  return idx;
}

SheField solve_mshe(const InitialData& init, double t, double dx, double dt,
                    double half_width, const Seed& seed, bool zero_noise) {
  if (!(dx > 0) || !(dt > 0) || !(t > 0) || !(half_width > 0))
    throw std::invalid_argument("solve_mshe: grid parameters must be positive");
  if (dt > 0.5 * dx * dx + 1e-15)
    throw std::invalid_argument("solve_mshe: stability requires dt <= dx^2/2");
  const int half = static_cast<int>(std::lround(half_width / dx));
  if (half < 2) throw std::invalid_argument("solve_mshe: window too narrow");
  const int n = 2 * half + 1;
  const int n_steps = static_cast<int>(std::lround(t / dt));
  if (n_steps < 1 || std::abs(n_steps * dt - t) > 1e-9 * t)
    throw std::invalid_argument("solve_mshe: t/dt must be integral");

  SheField f;
  f.dx = dx;
  f.dt = dt;
  f.t = t;
  f.half_width = half * dx;
  f.center = half;
  f.seed = seed;
  f.Z.setZero(n);
  if (init.kind == InitialData::Kind::narrow_wedge) {
    f.Z(half) = 1.0 / dx;
  } else {
    for (int j = 0; j < n; ++j) {
      double h = init.h0(f.x(j));
      f.Z(j) = (h == kNegInf) ? 0.0 : std::exp(h);
    }
  }
  f.Z(0) = 0.0;
  f.Z(n - 1) = 0.0;

  const double lap = dt / (2.0 * dx * dx);
  const double noise_scale = std::sqrt(dt / dx);
  const double floor = std::numeric_limits<double>::min();
  CounterRng rng(seed);
  Eigen::VectorXd next(n);
  for (int m = 0; m < n_steps; ++m) {
    next(0) = 0.0;
    next(n - 1) = 0.0;
    for (int j = 1; j < n - 1; ++j) {
      double xi = zero_noise ? (static_cast<void>(rng.normal()), 0.0) : rng.normal();
      double z = f.Z(j) + lap * (f.Z(j + 1) - 2.0 * f.Z(j) + f.Z(j - 1)) +
                 f.Z(j) * xi * noise_scale;
      if (z <= 0.0 && f.Z(j) > 0.0) {
        z = floor;
        ++f.floor_count;
      } else if (z < 0.0) {
        z = 0.0;
      }
      next(j) = z;
    }
    f.Z.swap(next);
  }
  return f;
}

Eigen::VectorXd hopf_cole(const SheField& field, int lo, int hi) {
  if (lo < 0 || hi >= field.size() || lo > hi)
    throw std::invalid_argument("hopf_cole: bad index range");
  Eigen::VectorXd h(hi - lo + 1);
  for (int j = lo; j <= hi; ++j) {
    if (!(field.Z(j) > 0.0))
      throw std::runtime_error("hopf_cole: nonpositive value at x = " +
                               std::to_string(field.x(j)));
    h(j - lo) = std::log(field.Z(j));
  }
  return h;
}

Eigen::VectorXd hopf_cole(const SheField& field) {
  return hopf_cole(field, 1, field.size() - 2);
}

double general_one_point(const SheField& nw_field,
                         const std::function<double(double)>& h0, double x) {
  const int n = nw_field.size();
  double best = kNegInf;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) - 2);
  for (int j = 1; j < n - 1; ++j) {
    if (!(nw_field.Z(j) > 0.0)) continue;
    double y = nw_field.x(j);
    double hb = h0(x - y);
    if (hb == kNegInf) continue;
    double w = (j == 1 || j == n - 2) ? 0.5 : 1.0;
    double term = std::log(nw_field.Z(j)) + hb + std::log(w * nw_field.dx);
    terms.push_back(term);
    best = std::max(best, term);
  }
  if (terms.empty() || best == kNegInf)
    throw std::runtime_error("general_one_point: integral underflows to zero");
  double s = 0.0;
  for (double term : terms) s += std::exp(term - best);
  return best + std::log(s);
}

HypReport hyp_check(const Eigen::VectorXd& values, double x0, double dx,
                    const HypParams& params) {
  if (!(params.C > 0) || !(params.delta > 0) || !(params.kappa > 0) || !(params.M > 0))
    throw std::invalid_argument("hyp_check: params must be positive");
  const int n = static_cast<int>(values.size());
  if (n < 2 || !(dx > 0)) throw std::invalid_argument("hyp_check: bad tabulation");
  const double x_end = x0 + (n - 1) * dx;
  if (x0 > -params.M + 1e-12 || x_end < params.M - 1e-12)
    throw std::invalid_argument("hyp_check: tabulation must cover [-M, M]");

  HypReport rep;
  int count = 0;
  for (int k = 0; k < n; ++k) {
    double x = x0 + k * dx;
    double f = values(k);
    if (f > params.C + 0.5 * (1.0 - params.kappa) * x * x) {
      rep.satisfied = false;
      if (!rep.witness_x) rep.witness_x = x;
    }
    if (std::abs(x) <= params.M && f >= -params.C) ++count;
  }
  rep.measure = count * dx;
  if (rep.measure < params.delta) rep.satisfied = false;
  return rep;
}

AttractivityReport attractivity_check(const std::function<double(double)>& h0_upper,
                                      const std::function<double(double)>& h0_lower,
                                      double t, double dx, double dt,
                                      double half_width, const Seed& seed) {
  SheField up = solve_mshe(InitialData::from_function(h0_upper), t, dx, dt,
                           half_width, seed);
  SheField lo = solve_mshe(InitialData::from_function(h0_lower), t, dx, dt,
                           half_width, seed);
  AttractivityReport rep;
  rep.slack = 10.0 * dx;
  for (int j = 0; j < up.size(); ++j) {
    double xj = up.x(j);
    double d0 = h0_upper(xj) - h0_lower(xj);
    if (d0 < 0)
      throw std::invalid_argument("attractivity_check: initial data not ordered");
    rep.sup_initial_diff = std::max(rep.sup_initial_diff, d0);
    if (up.Z(j) < lo.Z(j)) ++rep.ordering_violations;
  }
  Eigen::VectorXd hu = hopf_cole(up);
  Eigen::VectorXd hl = hopf_cole(lo);
  rep.sup_height_diff = (hu - hl).cwiseAbs().maxCoeff();
  rep.pass = rep.ordering_violations == 0 &&
             rep.sup_height_diff <= rep.sup_initial_diff + rep.slack;
  return rep;
}

Eigen::VectorXd endpoint_distribution(const SheField& field) {
  double total = field.Z.sum();
  if (!(total > 0)) throw std::runtime_error("endpoint_distribution: zero total mass");
  return field.Z / total;
}

double mass_radius(const SheField& field, const Eigen::VectorXd& p, double frac) {
  if (p.size() != field.Z.size())
    throw std::invalid_argument("mass_radius: size mismatch");
  for (int r = 0; r <= field.center; ++r) {
    double m = 0.0;
    for (int j = field.center - r; j <= field.center + r; ++j) m += p(j);
    if (m >= frac) return r * field.dx;
  }
  return field.half_width;
}

double window_mass(const SheField& field, const Eigen::VectorXd& p,
                   double x_center, double radius) {
  double m = 0.0;
  for (int j = 0; j < field.size(); ++j)
    if (std::abs(field.x(j) - x_center) <= radius) m += p(j);
  return m;
}

}  // namespace kpzlab
