#include "kpzlab/polymer.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

namespace kpzlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

int BrownianEnvironment::node_index(double s) const {
  double raw = s / dt;
  int m = static_cast<int>(std::lround(raw));
  if (m < 0 || m > steps || std::abs(raw - m) > 1e-9 * std::max(1.0, std::abs(raw)))
    throw std::invalid_argument("BrownianEnvironment: s is off-grid");
  return m;
}

BrownianEnvironment sample_environment(int N, double s_max, double dt,
                                       const Seed& seed) {
  if (N < 1) throw std::invalid_argument("sample_environment: need N >= 1");
  if (!(dt > 0)) throw std::invalid_argument("sample_environment: need dt > 0");
  double raw = s_max / dt;
  int steps = static_cast<int>(std::lround(raw));
  if (steps < 1 || std::abs(raw - steps) > 1e-9 * raw)
    throw std::invalid_argument("sample_environment: s_max/dt must be integral");
  BrownianEnvironment env;
  env.N = N;
  env.dt = dt;
  env.steps = steps;
  env.seed = seed;
  env.increments.resize(N, steps);
  env.cumulative.resize(N, steps + 1);
  const double sd = std::sqrt(dt);
  CounterRng rng(seed);
  for (int i = 0; i < N; ++i) {
    env.cumulative(i, 0) = 0.0;
    for (int m = 0; m < steps; ++m) {
      env.increments(i, m) = sd * rng.normal();
      env.cumulative(i, m + 1) = env.cumulative(i, m) + env.increments(i, m);
    }
  }
  return env;
}

Eigen::MatrixXd single_path_log_table(const BrownianEnvironment& env,
                                      int start_level, double beta,
                                      bool refined) {
  if (start_level < 1 || start_level > env.N)
    throw std::invalid_argument("single_path_log_table: bad start level");
  const int N = env.N;
  const double dt = env.dt;
  const double log_dt = std::log(dt);
  const double comp = 0.5 * beta * beta * dt;
  // Weights of j level jumps within one column: dt^j / j!.
  const int j_max = refined ? 4 : 1;
  double jump_log[5];
  jump_log[0] = 0.0;
  for (int j = 1; j <= j_max; ++j)
    jump_log[j] = jump_log[j - 1] + log_dt - std::log(static_cast<double>(j));
  Eigen::MatrixXd table = Eigen::MatrixXd::Constant(N, env.steps + 1, kNegInf);
  table(start_level - 1, 0) = 0.0;
  Eigen::VectorXd prev(N), noisy(N), cur(N);
  prev = table.col(0);
  for (int m = 1; m <= env.steps; ++m) {
    for (int k = start_level; k <= N; ++k)
      noisy(k - 1) = prev(k - 1) + beta * env.increments(k - 1, m - 1) - comp;
    for (int k = start_level; k <= N; ++k) {
      double acc = noisy(k - 1);
      // Plain scheme: one jump per column, jump term carries no noise.
      // Refined scheme: jumps happen inside the column after its noise, so
      // every column contributes exactly one noise factor per path and the
      // jump-time simplex volume is counted exactly.
      for (int j = 1; j <= j_max && k - j >= start_level; ++j)
        acc = log_add(acc, jump_log[j] +
                               (refined ? noisy(k - 1 - j) : prev(k - 1 - j)));
      cur(k - 1) = acc;
    }
    for (int k = 1; k < start_level; ++k) cur(k - 1) = kNegInf;
    table.col(m) = cur;
    prev.swap(cur);
  }
  return table;
}

double partition_single(const BrownianEnvironment& env, int start_level,
                        int end_level, double s, double beta, bool refined) {
  if (start_level < 1 || end_level > env.N || start_level > end_level)
    throw std::invalid_argument("partition_single: need 1 <= i <= j <= N");
  int m = env.node_index(s);
  const double dt = env.dt;
  const double log_dt = std::log(dt);
  const double comp = 0.5 * beta * beta * dt;
  const int j_max = refined ? 4 : 1;
  double jump_log[5];
  jump_log[0] = 0.0;
  for (int j = 1; j <= j_max; ++j)
    jump_log[j] = jump_log[j - 1] + log_dt - std::log(static_cast<double>(j));
  const std::size_t width = static_cast<std::size_t>(end_level - start_level + 1);
  std::vector<double> prev(width, kNegInf), noisy(width), cur(width);
  prev[0] = 0.0;
  for (int step = 1; step <= m; ++step) {
    for (std::size_t idx = 0; idx < width; ++idx)
      noisy[idx] = prev[idx] +
                   beta * env.increments(static_cast<int>(idx) + start_level - 1,
                                         step - 1) -
                   comp;
    for (std::size_t idx = 0; idx < width; ++idx) {
      double acc = noisy[idx];
      for (int j = 1; j <= j_max && idx >= static_cast<std::size_t>(j); ++j)
        acc = log_add(acc, jump_log[j] + (refined ? noisy[idx - static_cast<std::size_t>(j)]
                                                  : prev[idx - static_cast<std::size_t>(j)]));
      cur[idx] = acc;
    }
    prev.swap(cur);
  }
  return prev.back();
}

namespace {

// log det exp(L) for an n x n matrix of log entries, by factoring row maxima.
// Throws if the determinant is not strictly positive.
double log_det_from_logs(const Eigen::MatrixXd& L, double dt) {
  const Eigen::Index n = L.rows();
  double shift = 0.0;
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    double r = L.row(a).maxCoeff();
    if (r == kNegInf)
      throw std::runtime_error(
          "partition_hierarchy: path configuration unreachable on this grid "
          "(too few time steps before the readout point)");
    shift += r;
    for (Eigen::Index b = 0; b < n; ++b) A(a, b) = std::exp(L(a, b) - r);
  }
  double det = Eigen::PartialPivLU<Eigen::MatrixXd>(A).determinant();
  if (!(det > 0))
    throw std::runtime_error(
        "partition_hierarchy: nonpositive determinant at dt = " +
        std::to_string(dt) + "; refine the time step");
  return std::log(det) + shift;
}

}  // namespace

double partition_hierarchy(const BrownianEnvironment& env, int n, double s,
                           double beta, bool refined) {
  if (n < 1 || n > env.N)
    throw std::invalid_argument("partition_hierarchy: need 1 <= n <= N");
  int m = env.node_index(s);
  Eigen::MatrixXd L(n, n);
  for (int a = 1; a <= n; ++a) {
    Eigen::MatrixXd table = single_path_log_table(env, a, beta, refined);
    for (int b = 1; b <= n; ++b) L(a - 1, b - 1) = table(env.N - n + b - 1, m);
  }
  return log_det_from_logs(L, env.dt);
}

PartitionHierarchy partition_hierarchy_curve(const BrownianEnvironment& env,
                                             int n_max, int m_start, int m_end,
                                             double beta, bool refined) {
  if (n_max < 1 || n_max > env.N)
    throw std::invalid_argument("partition_hierarchy_curve: need 1 <= n_max <= N");
  if (m_start < 0 || m_end > env.steps || m_start >= m_end)
    throw std::invalid_argument("partition_hierarchy_curve: bad node range");
  std::vector<Eigen::MatrixXd> tables;
  tables.reserve(static_cast<std::size_t>(n_max));
  for (int a = 1; a <= n_max; ++a)
    tables.push_back(single_path_log_table(env, a, beta, refined));
  PartitionHierarchy ph;
  ph.beta = beta;
  ph.grid = TimeGrid(m_start * env.dt, m_end * env.dt, m_end - m_start);
  ph.log_z.resize(n_max, m_end - m_start + 1);
  Eigen::MatrixXd L(n_max, n_max);
  for (int m = m_start; m <= m_end; ++m) {
    for (int n = 1; n <= n_max; ++n) {
      for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b)
          L(a - 1, b - 1) = tables[static_cast<std::size_t>(a - 1)](env.N - n + b - 1, m);
      ph.log_z(n - 1, m - m_start) = log_det_from_logs(L.topLeftCorner(n, n), env.dt);
    }
  }
  return ph;
}

LineEnsemble free_energy_ensemble(const BrownianEnvironment& env, int n_max,
                                  int m_start, int m_end, double beta,
                                  bool refined) {
  PartitionHierarchy ph =
      partition_hierarchy_curve(env, n_max, m_start, m_end, beta, refined);
  LineEnsemble ens;
  ens.grid = ph.grid;
  for (int n = 1; n <= n_max; ++n) {
    Eigen::VectorXd x = ph.log_z.row(n - 1);
    if (n > 1) x -= ph.log_z.row(n - 2).transpose();
    ens.curves.emplace_back(ph.grid, std::move(x));
  }
  return ens;
}

namespace {

// Max-plus DP over level-occupancy subsets: state = bitmask of the n levels
// currently occupied; per column each path stays (collecting its increment)
// or moves up one level, and occupancies stay disjoint.
std::vector<double> lpp_top_values(const BrownianEnvironment& env, int n,
                                   int m_end) {
  const int N = env.N;
  std::vector<std::uint32_t> states;
  for (std::uint32_t mask = 0; mask < (1u << N); ++mask)
    if (std::popcount(mask) == n) states.push_back(mask);
  std::vector<int> index(1u << N, -1);
  for (std::size_t i = 0; i < states.size(); ++i)
    index[states[i]] = static_cast<int>(i);

  const std::uint32_t start = (1u << n) - 1u;
  const std::uint32_t top = start << (N - n);
  std::vector<double> v(states.size(), kNegInf), next(states.size());
  v[static_cast<std::size_t>(index[start])] = 0.0;
  std::vector<double> out(static_cast<std::size_t>(m_end) + 1, kNegInf);
  out[0] = v[static_cast<std::size_t>(index[top])];
  for (int m = 1; m <= m_end; ++m) {
    std::fill(next.begin(), next.end(), kNegInf);
    for (std::size_t si = 0; si < states.size(); ++si) {
      if (v[si] == kNegInf) continue;
      std::uint32_t s = states[si];
      // jumpers = submask of paths moving up one level this column
      for (std::uint32_t jump = s;; jump = (jump - 1) & s) {
        std::uint32_t stay = s & ~jump;
        std::uint32_t moved = jump << 1;
        if ((moved & ~((1u << N) - 1u)) == 0 && (moved & stay) == 0) {
          std::uint32_t dest = stay | moved;
          double gain = 0.0;
          for (std::uint32_t b = stay; b; b &= b - 1)
            gain += env.increments(std::countr_zero(b), m - 1);
          int di = index[dest];
          double cand = v[si] + gain;
          if (cand > next[static_cast<std::size_t>(di)])
            next[static_cast<std::size_t>(di)] = cand;
        }
        if (jump == 0) break;
      }
    }
    v.swap(next);
    out[static_cast<std::size_t>(m)] = v[static_cast<std::size_t>(index[top])];
  }
  return out;
}

}  // namespace

LineEnsemble lpp_ensemble(const BrownianEnvironment& env, int n_max,
                          int m_start, int m_end) {
  if (n_max < 1 || n_max > env.N)
    throw std::invalid_argument("lpp_ensemble: need 1 <= n_max <= N");
  if (env.N > 16)
    throw std::invalid_argument("lpp_ensemble: subset dynamic program limited to N <= 16");
  if (m_start < 0 || m_end > env.steps || m_start >= m_end)
    throw std::invalid_argument("lpp_ensemble: bad node range");
  std::vector<std::vector<double>> tops;  // tops[n] = T_n on nodes 0..m_end
  tops.push_back(std::vector<double>(static_cast<std::size_t>(m_end) + 1, 0.0));
  for (int n = 1; n <= n_max; ++n) tops.push_back(lpp_top_values(env, n, m_end));

  LineEnsemble ens;
  ens.grid = TimeGrid(m_start * env.dt, m_end * env.dt, m_end - m_start);
  for (int n = 1; n <= n_max; ++n) {
    Eigen::VectorXd vals(m_end - m_start + 1);
    for (int m = m_start; m <= m_end; ++m) {
      double tn = tops[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
      double tp = tops[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(m)];
      if (tn == kNegInf)
        throw std::runtime_error(
            "lpp_ensemble: top configuration unreachable before the window start");
      vals(m - m_start) = tn - tp;
    }
    ens.curves.emplace_back(ens.grid, std::move(vals));
  }
  return ens;
}

double ScaledEnsembleParams::log_c(double x) const {
  const double tn = std::sqrt(t * static_cast<double>(N));
  return N + 0.5 * (tn + x) + x * std::sqrt(static_cast<double>(N) / t) +
         0.5 * N * (std::log(t) - std::log(static_cast<double>(N)));
}

ScaledEnsembles scale_ensemble(const LineEnsemble& free_energies,
                               const ScaledEnsembleParams& params) {
  if (!(params.t > 0) || params.N < 1)
    throw std::invalid_argument("scale_ensemble: need t > 0 and N >= 1");
  const double center = params.s_center();
  const TimeGrid& sg = free_energies.grid;
  if (sg.a <= 0.0)
    throw std::invalid_argument("scale_ensemble: window extends below s = 0");
  const double t13 = std::cbrt(params.t);
  const double t23 = t13 * t13;

  ScaledEnsembles out;
  out.unscaled.grid = TimeGrid(sg.a - center, sg.b - center, sg.m);
  out.scaled.grid =
      TimeGrid((sg.a - center) / t23, (sg.b - center) / t23, sg.m);
  for (const Path& curve : free_energies.curves) {
    Eigen::VectorXd h(sg.m + 1);
    for (int j = 0; j <= sg.m; ++j) {
      double s = sg.node(j);
      double x = s - center;
      h(j) = curve.values(j) + 0.5 * s - params.log_c(x);
    }
    Eigen::VectorXd hs = (h.array() + params.t / 24.0) / t13;
    out.unscaled.curves.emplace_back(out.unscaled.grid, std::move(h));
    out.scaled.curves.emplace_back(out.scaled.grid, std::move(hs));
  }
  return out;
}

}  // namespace kpzlab
