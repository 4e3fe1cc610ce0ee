#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "kpzlab/gibbs.hpp"
#include "kpzlab/rng.hpp"
#include "kpzlab/stochastic.hpp"

namespace kpzlab {

/// N independent discretized Brownian motions driving the semi-discrete
/// polymer. Increments are Normal(0, dt); cumulative paths start at 0.
struct BrownianEnvironment {
  int N = 1;
  double dt = 1.0;
  int steps = 1;  // horizon = steps * dt
  Seed seed;
  Eigen::MatrixXd increments;  // N x steps, entry (i-1, m-1) = dB_i(m)
  Eigen::MatrixXd cumulative;  // N x (steps+1), entry (i-1, m) = B_i(m dt)

  double s_max() const { return dt * steps; }
  double motion(int level, int node) const { return cumulative(level - 1, node); }

  /// Nearest grid index of s; throws when s is off-grid or out of range.
  int node_index(double s) const;
};

BrownianEnvironment sample_environment(int N, double s_max, double dt,
                                       const Seed& seed);

/// Log partition function of a single up/right polymer path from level i at
/// time 0 to level j at time s. Multiplicative dynamic program
///   Z(m,k) = Z(m-1,k) exp(beta dB_k(m) - beta^2 dt/2) + dt Z(m-1,k-1),
/// started from Z(0,k) = 1{k=i}; the Ito compensator keeps the N-path
/// identity exact in this convention.
///
/// With refined = true each column instead applies the exact level-jump
/// semigroup exp(dt J) (terms dt^j/j!, j <= 4) after the noise update. The
/// one-jump-per-column scheme undercounts the volume of close jump times by
/// a factor ~exp(-k^2 / 2m) at level k after m columns, which matters when
/// k^2 dt is not small; the refined scheme removes that bias at the same dt.
double partition_single(const BrownianEnvironment& env, int start_level,
                        int end_level, double s, double beta = 1.0,
                        bool refined = false);

/// Full log DP table for paths started at start_level: entry (k-1, m) is
/// log Z(m, k); unreachable cells are -infinity.
Eigen::MatrixXd single_path_log_table(const BrownianEnvironment& env,
                                      int start_level, double beta = 1.0,
                                      bool refined = false);

/// Log of Z_n(s), the partition function over n-tuples of non-intersecting
/// up/right paths from levels 1..n to levels N-n+1..N, computed as an n x n
/// determinant of single-path partition functions with row scaling. Throws
/// when the determinant is not positive (coarse-dt artifact; refine dt).
double partition_hierarchy(const BrownianEnvironment& env, int n, double s,
                           double beta = 1.0, bool refined = false);

/// Z_1..Z_{n_max} in log-space along a contiguous slice of the environment
/// grid, nodes m_start..m_end.
struct PartitionHierarchy {
  double beta = 1.0;
  TimeGrid grid;
  Eigen::MatrixXd log_z;  // n_max x (grid.m + 1)
};

PartitionHierarchy partition_hierarchy_curve(const BrownianEnvironment& env,
                                             int n_max, int m_start, int m_end,
                                             double beta = 1.0,
                                             bool refined = false);

/// Free-energy curves X_n(s) = log Z_n(s) - log Z_{n-1}(s), n = 1..n_max,
/// on grid nodes m_start..m_end. Curves may cross; no ordering is enforced.
LineEnsemble free_energy_ensemble(const BrownianEnvironment& env, int n_max,
                                  int m_start, int m_end, double beta = 1.0,
                                  bool refined = false);

/// Zero-temperature analogue: M_n(s) = T_n(s) - T_{n-1}(s) where T_n is the
/// max total increment over n non-intersecting up/right paths (max-plus
/// dynamic program, no compensator). Start levels 1..n, end levels N-n+1..N.
LineEnsemble lpp_ensemble(const BrownianEnvironment& env, int n_max,
                          int m_start, int m_end);

/// Centering/scaling data for the finite-N crossover ensembles.
struct ScaledEnsembleParams {
  double t = 1.0;
  int N = 1;

  /// log C(N,t,x) = N + (sqrt(tN)+x)/2 + x sqrt(N/t) + N (log t - log N)/2.
  double log_c(double x) const;
  double s_center() const { return std::sqrt(t * static_cast<double>(N)); }
};

struct ScaledEnsembles {
  LineEnsemble unscaled;  // h_n(x), x = s - sqrt(tN)
  LineEnsemble scaled;    // H_n(chi), chi = x / t^{2/3}
};

/// Centers and rescales compensated free-energy curves (beta = 1):
///   h_n(x) = X_n(sqrt(tN)+x) + (sqrt(tN)+x)/2 - log C(N,t,x)
///   h_n(x) = -t/24 + t^{1/3} H_n(t^{-2/3} x).
/// The +s/2 restores the uncompensated convention the centering assumes.
ScaledEnsembles scale_ensemble(const LineEnsemble& free_energies,
                               const ScaledEnsembleParams& params);

}  // namespace kpzlab
