#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kpzlab/rng.hpp"
#include "kpzlab/stats.hpp"
#include "kpzlab/stochastic.hpp"

namespace kpzlab {

/// Interaction H: R -> [0, inf). The distinguished family is
/// H_t(x) = exp(t^{1/3} x); soft penalty on curve i+1 rising above curve i.
class Hamiltonian {
 public:
  static Hamiltonian special(double t) {
    if (!(t > 0)) throw std::invalid_argument("Hamiltonian::special: need t > 0");
    Hamiltonian h;
    h.rate_ = std::cbrt(t);
    h.convex_ = true;
    return h;
  }

  static Hamiltonian zero() {
    return tabulated([](double) { return 0.0; }, true);
  }

  static Hamiltonian tabulated(std::function<double(double)> f, bool convex) {
    Hamiltonian h;
    h.fn_ = std::move(f);
    h.convex_ = convex;
    return h;
  }

  double operator()(double x) const { return fn_ ? fn_(x) : std::exp(rate_ * x); }
  bool convex() const { return convex_; }
  bool is_zero() const {
    return fn_ && fn_(0.0) == 0.0 && fn_(1.0) == 0.0 && fn_(-1.0) == 0.0;
  }

 private:
  Hamiltonian() = default;
  std::function<double(double)> fn_;  // empty => special exp(rate * x)
  double rate_ = 0.0;
  bool convex_ = false;
};

/// Curves indexed k1..k2 with entrance/exit vectors and boundary curves.
/// Absent f means +infinity above, absent g means -infinity below; those
/// interaction terms vanish exactly.
struct BoundaryData {
  int k1 = 1;
  int k2 = 1;
  Eigen::VectorXd entrance;  // length k2 - k1 + 1
  Eigen::VectorXd exit;
  std::optional<Path> f;  // curve index k1 - 1
  std::optional<Path> g;  // curve index k2 + 1

  int curve_count() const { return k2 - k1 + 1; }
  void validate(const TimeGrid& grid) const;
};

/// Ordered list of curves on a shared grid. Curves may cross.
struct LineEnsemble {
  TimeGrid grid;
  std::vector<Path> curves;
};

/// exp{ -sum_i integral H(L_{i+1} - L_i) } with trapezoid integrals; in (0,1].
double boltzmann_weight(const LineEnsemble& ens, const BoundaryData& bd,
                        const Hamiltonian& H);

struct PartitionEstimate {
  double estimate = 1.0;
  double standard_error = 0.0;
  int n_samples = 0;
};

/// Monte Carlo mean of the Boltzmann weight over free bridge ensembles.
PartitionEstimate estimate_partition(const BoundaryData& bd, const Hamiltonian& H,
                                     const TimeGrid& grid, int n_samples,
                                     const Seed& seed);

struct RejectionFailure : std::runtime_error {
  RejectionFailure(int attempts, double acceptance_rate)
      : std::runtime_error("rejection_sample: attempts exhausted"),
        attempts(attempts),
        acceptance_rate(acceptance_rate) {}
  int attempts;
  double acceptance_rate;
};

/// Exact sampler of the H-Brownian bridge line-ensemble law on the grid:
/// free bridges accepted when the Boltzmann weight beats an independent
/// uniform. Throws RejectionFailure when attempts run out.
LineEnsemble rejection_sample(const BoundaryData& bd, const Hamiltonian& H,
                              const TimeGrid& grid, int max_attempts,
                              const Seed& seed);
LineEnsemble rejection_sample(const BoundaryData& bd, const Hamiltonian& H,
                              const TimeGrid& grid, int max_attempts,
                              CounterRng& rng);

/// Random walk bridges on the lattice n^{-1} Z, time increments n^{-2},
/// every consecutive increment exactly +-n^{-1}. Values stored in units of
/// n^{-1} as integers.
struct DiscreteWalkEnsemble {
  int n = 1;        // lattice scale
  int steps = 2;    // number of time increments
  std::vector<std::vector<int>> walks;  // [curve][site 0..steps]

  double value(int curve, int site) const {
    return static_cast<double>(walks[static_cast<std::size_t>(curve)]
                                    [static_cast<std::size_t>(site)]) / n;
  }
  double time_step() const { return 1.0 / (static_cast<double>(n) * n); }
  void validate() const;

  /// Lowest trajectory consistent with the given endpoints (integer units
  /// of n^{-1}; endpoints must have the parity of the step count).
  static DiscreteWalkEnsemble minimal(int n, int steps,
                                      const std::vector<int>& start,
                                      const std::vector<int>& finish);
};

/// Boundary curves for the walk chain, sampled on the walk's time grid.
struct WalkBoundary {
  std::optional<std::vector<double>> f;  // above; absent => +infinity
  std::optional<std::vector<double>> g;  // below; absent => -infinity

  static WalkBoundary open() { return {}; }
  static WalkBoundary constants(std::optional<double> fv, std::optional<double> gv,
                                int n_sites);
};

struct MetropolisReport {
  DiscreteWalkEnsemble state;
  long long proposals = 0;
  long long structurally_legal = 0;
  long long accepted = 0;
};

/// Discrete-time random-scan flip chain: per step pick (site, curve,
/// direction), propose +-2 n^{-1}, accept iff the Boltzmann weight ratio
/// R >= U. Proposals breaking the +-n^{-1} increment structure auto-reject.
MetropolisReport metropolis_run(const DiscreteWalkEnsemble& initial,
                                const WalkBoundary& bd, const Hamiltonian& H,
                                long long n_steps, const Seed& seed);

/// Callback variant: visit(state) after every step (for occupation statistics).
MetropolisReport metropolis_run(const DiscreteWalkEnsemble& initial,
                                const WalkBoundary& bd, const Hamiltonian& H,
                                long long n_steps, const Seed& seed,
                                const std::function<void(const DiscreteWalkEnsemble&)>& visit);

struct CoupledReport {
  DiscreteWalkEnsemble upper;  // boundaries (f1, g1)
  DiscreteWalkEnsemble lower;  // boundaries (f2, g2) <= (f1, g1)
  long long ordering_violations = 0;
};

/// Runs two chains with shared proposals and shared uniforms. With convex H
/// and ordered boundaries the upper chain must stay above the lower one; a
/// violation under a convex H throws (implementation or convexity bug).
CoupledReport coupled_metropolis_run(const DiscreteWalkEnsemble& initial,
                                     const WalkBoundary& bd_upper,
                                     const WalkBoundary& bd_lower,
                                     const Hamiltonian& H, long long n_steps,
                                     const Seed& seed);

struct GibbsTestReport {
  KsResult midpoint;
  KsResult increment;
  double rejection_failure_rate = 0.0;
  bool testable = true;
  bool pass(double alpha = 0.01) const {
    return testable && midpoint.p_value > alpha && increment.p_value > alpha;
  }
};

/// Statistical check of the distributional invariance: resample curves k1..k2
/// on the sub-grid [ja, jb] of each sample via rejection_sample with boundary
/// data read from the sample, then KS-compare selected functionals of the
/// original and resampled populations.
GibbsTestReport gibbs_invariance_test(const std::vector<LineEnsemble>& samples,
                                      int k1, int k2, int ja, int jb,
                                      const Hamiltonian& H, const Seed& seed,
                                      int max_attempts = 2000, int workers = 1);

}  // namespace kpzlab
