#include "kpzlab/gibbs.hpp"

#include <algorithm>
#include <cmath>

#include "kpzlab/parallel.hpp"

namespace kpzlab {

void BoundaryData::validate(const TimeGrid& grid) const {
  if (k1 > k2) throw std::invalid_argument("BoundaryData: need k1 <= k2");
  if (entrance.size() != curve_count() || exit.size() != curve_count())
    throw std::invalid_argument("BoundaryData: entrance/exit length mismatch");
  if (f && f->grid != grid) throw std::invalid_argument("BoundaryData: f grid mismatch");
  if (g && g->grid != grid) throw std::invalid_argument("BoundaryData: g grid mismatch");
}

namespace {

// Trapezoid integral of H(lower_curve - upper_curve) on the shared grid.
double interaction_integral(const Eigen::VectorXd& upper, const Eigen::VectorXd& lower,
                            const Hamiltonian& H, double dt) {
  const Eigen::Index m = upper.size() - 1;
  double s = 0.5 * (H(lower(0) - upper(0)) + H(lower(m) - upper(m)));
  for (Eigen::Index j = 1; j < m; ++j) s += H(lower(j) - upper(j));
  return s * dt;
}

}  // namespace

double boltzmann_weight(const LineEnsemble& ens, const BoundaryData& bd,
                        const Hamiltonian& H) {
  bd.validate(ens.grid);
  const int k = static_cast<int>(ens.curves.size());
  if (k != bd.curve_count())
    throw std::invalid_argument("boltzmann_weight: curve count mismatch");
  for (const Path& p : ens.curves) {
    if (p.grid != ens.grid) throw std::invalid_argument("boltzmann_weight: grid mismatch");
    if (!p.values.allFinite())
      throw std::invalid_argument("boltzmann_weight: non-finite curve values");
  }
  const double dt = ens.grid.dt();
  double action = 0.0;
  if (bd.f) action += interaction_integral(bd.f->values, ens.curves.front().values, H, dt);
  for (int i = 0; i + 1 < k; ++i)
    action += interaction_integral(ens.curves[static_cast<std::size_t>(i)].values,
                                   ens.curves[static_cast<std::size_t>(i) + 1].values, H, dt);
  if (bd.g) action += interaction_integral(ens.curves.back().values, bd.g->values, H, dt);
  return std::exp(-action);
}

namespace {

LineEnsemble sample_free_ensemble(const BoundaryData& bd, const TimeGrid& grid,
                                  CounterRng& rng) {
  LineEnsemble ens;
  ens.grid = grid;
  ens.curves.reserve(static_cast<std::size_t>(bd.curve_count()));
  for (int i = 0; i < bd.curve_count(); ++i)
    ens.curves.push_back(sample_bridge(grid, bd.entrance(i), bd.exit(i), rng));
  return ens;
}

}  // namespace

PartitionEstimate estimate_partition(const BoundaryData& bd, const Hamiltonian& H,
                                     const TimeGrid& grid, int n_samples,
                                     const Seed& seed) {
  if (n_samples < 2) throw std::invalid_argument("estimate_partition: need n_samples >= 2");
  bd.validate(grid);
  CounterRng base(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < n_samples; ++r) {
    CounterRng rng = base.fork(static_cast<std::uint64_t>(r));
    LineEnsemble ens = sample_free_ensemble(bd, grid, rng);
    double w = boltzmann_weight(ens, bd, H);
    sum += w;
    sum_sq += w * w;
  }
  PartitionEstimate est;
  est.n_samples = n_samples;
  est.estimate = sum / n_samples;
  double var = std::max(0.0, (sum_sq - sum * sum / n_samples) / (n_samples - 1));
  est.standard_error = std::sqrt(var / n_samples);
  return est;
}

LineEnsemble rejection_sample(const BoundaryData& bd, const Hamiltonian& H,
                              const TimeGrid& grid, int max_attempts,
                              CounterRng& rng) {
  if (max_attempts < 1) throw std::invalid_argument("rejection_sample: need max_attempts >= 1");
  bd.validate(grid);
  double weight_sum = 0.0;
  for (int a = 0; a < max_attempts; ++a) {
    LineEnsemble ens = sample_free_ensemble(bd, grid, rng);
    double w = boltzmann_weight(ens, bd, H);
    weight_sum += w;
    double u = rng.uniform();
    if (w >= u) return ens;
  }
  throw RejectionFailure(max_attempts, weight_sum / max_attempts);
}

LineEnsemble rejection_sample(const BoundaryData& bd, const Hamiltonian& H,
                              const TimeGrid& grid, int max_attempts,
                              const Seed& seed) {
  CounterRng rng(seed);
  return rejection_sample(bd, H, grid, max_attempts, rng);
}

void DiscreteWalkEnsemble::validate() const {
  if (n < 1) throw std::invalid_argument("DiscreteWalkEnsemble: need n >= 1");
  if (steps < 2) throw std::invalid_argument("DiscreteWalkEnsemble: need steps >= 2");
  for (const auto& w : walks) {
    if (static_cast<int>(w.size()) != steps + 1)
      throw std::invalid_argument("DiscreteWalkEnsemble: walk length mismatch");
    for (std::size_t s = 1; s < w.size(); ++s)
      if (std::abs(w[s] - w[s - 1]) != 1)
        throw std::invalid_argument("DiscreteWalkEnsemble: increment must be +-1");
  }
}

DiscreteWalkEnsemble DiscreteWalkEnsemble::minimal(int n, int steps,
                                                   const std::vector<int>& start,
                                                   const std::vector<int>& finish) {
  if (start.size() != finish.size())
    throw std::invalid_argument("minimal: endpoint count mismatch");
  DiscreteWalkEnsemble ens;
  ens.n = n;
  ens.steps = steps;
  for (std::size_t j = 0; j < start.size(); ++j) {
    int span = finish[j] - start[j];
    if (std::abs(span) > steps || ((span + steps) % 2) != 0)
      throw std::invalid_argument("minimal: endpoints unreachable in given steps");
    std::vector<int> w(static_cast<std::size_t>(steps) + 1);
    for (int s = 0; s <= steps; ++s)
      w[static_cast<std::size_t>(s)] = std::max(start[j] - s, finish[j] - (steps - s));
    ens.walks.push_back(std::move(w));
  }
  ens.validate();
  return ens;
}

WalkBoundary WalkBoundary::constants(std::optional<double> fv, std::optional<double> gv,
                                     int n_sites) {
  WalkBoundary bd;
  if (fv) bd.f = std::vector<double>(static_cast<std::size_t>(n_sites), *fv);
  if (gv) bd.g = std::vector<double>(static_cast<std::size_t>(n_sites), *gv);
  return bd;
}

namespace {

struct FlipProposal {
  int site;
  int curve;
  int direction;  // +1 or -1
  double u;
};

FlipProposal draw_proposal(CounterRng& rng, int steps, int curves) {
  FlipProposal p;
  p.site = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(steps - 1));
  p.curve = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(curves));
  p.direction = (rng.next_u64() & 1u) ? 1 : -1;
  p.u = rng.uniform();
  return p;
}

bool flip_legal(const std::vector<int>& w, int site, int direction) {
  return w[static_cast<std::size_t>(site) - 1] == w[static_cast<std::size_t>(site)] + direction &&
         w[static_cast<std::size_t>(site) + 1] == w[static_cast<std::size_t>(site)] + direction;
}

// Boltzmann-weight ratio for changing curve j at an interior site by
// 2*direction/n; only the trapezoid term at that site moves.
double flip_ratio(const DiscreteWalkEnsemble& ens, const WalkBoundary& bd,
                  const Hamiltonian& H, int site, int curve, int direction) {
  const double dt = ens.time_step();
  const double old_v = ens.value(curve, site);
  const double new_v = old_v + 2.0 * direction / ens.n;
  const std::size_t s = static_cast<std::size_t>(site);
  double delta = 0.0;
  if (curve > 0) {
    double above = ens.value(curve - 1, site);
    delta += H(new_v - above) - H(old_v - above);
  } else if (bd.f) {
    double above = (*bd.f)[s];
    delta += H(new_v - above) - H(old_v - above);
  }
  if (curve + 1 < static_cast<int>(ens.walks.size())) {
    double below = ens.value(curve + 1, site);
    delta += H(below - new_v) - H(below - old_v);
  } else if (bd.g) {
    double below = (*bd.g)[s];
    delta += H(below - new_v) - H(below - old_v);
  }
  return std::exp(-dt * delta);
}

void check_boundary(const WalkBoundary& bd, int n_sites) {
  if (bd.f && static_cast<int>(bd.f->size()) != n_sites)
    throw std::invalid_argument("WalkBoundary: f length mismatch");
  if (bd.g && static_cast<int>(bd.g->size()) != n_sites)
    throw std::invalid_argument("WalkBoundary: g length mismatch");
}

}  // namespace

MetropolisReport metropolis_run(const DiscreteWalkEnsemble& initial,
                                const WalkBoundary& bd, const Hamiltonian& H,
                                long long n_steps, const Seed& seed,
                                const std::function<void(const DiscreteWalkEnsemble&)>& visit) {
  initial.validate();
  check_boundary(bd, initial.steps + 1);
  MetropolisReport rep;
  rep.state = initial;
  CounterRng rng(seed);
  const int curves = static_cast<int>(rep.state.walks.size());
  for (long long step = 0; step < n_steps; ++step) {
    FlipProposal p = draw_proposal(rng, rep.state.steps, curves);
    ++rep.proposals;
    auto& walk = rep.state.walks[static_cast<std::size_t>(p.curve)];
    if (flip_legal(walk, p.site, p.direction)) {
      ++rep.structurally_legal;
      double r = flip_ratio(rep.state, bd, H, p.site, p.curve, p.direction);
      if (r >= p.u) {
        walk[static_cast<std::size_t>(p.site)] += 2 * p.direction;
        ++rep.accepted;
      }
    }
    if (visit) visit(rep.state);
  }
  return rep;
}

MetropolisReport metropolis_run(const DiscreteWalkEnsemble& initial,
                                const WalkBoundary& bd, const Hamiltonian& H,
                                long long n_steps, const Seed& seed) {
  return metropolis_run(initial, bd, H, n_steps, seed, nullptr);
}

CoupledReport coupled_metropolis_run(const DiscreteWalkEnsemble& initial,
                                     const WalkBoundary& bd_upper,
                                     const WalkBoundary& bd_lower,
                                     const Hamiltonian& H, long long n_steps,
                                     const Seed& seed) {
  initial.validate();
  check_boundary(bd_upper, initial.steps + 1);
  check_boundary(bd_lower, initial.steps + 1);
  CoupledReport rep;
  rep.upper = initial;
  rep.lower = initial;
  CounterRng rng(seed);
  const int curves = static_cast<int>(initial.walks.size());
  for (long long step = 0; step < n_steps; ++step) {
    FlipProposal p = draw_proposal(rng, initial.steps, curves);
    const std::size_t j = static_cast<std::size_t>(p.curve);
    const std::size_t s = static_cast<std::size_t>(p.site);
    auto& wu = rep.upper.walks[j];
    auto& wl = rep.lower.walks[j];
    if (flip_legal(wu, p.site, p.direction) &&
        flip_ratio(rep.upper, bd_upper, H, p.site, p.curve, p.direction) >= p.u)
      wu[s] += 2 * p.direction;
    if (flip_legal(wl, p.site, p.direction) &&
        flip_ratio(rep.lower, bd_lower, H, p.site, p.curve, p.direction) >= p.u)
      wl[s] += 2 * p.direction;
    if (wu[s] < wl[s]) {
      ++rep.ordering_violations;
      if (H.convex())
        throw std::logic_error(
            "coupled_metropolis_run: ordering violated under a convex Hamiltonian");
    }
  }
  return rep;
}

GibbsTestReport gibbs_invariance_test(const std::vector<LineEnsemble>& samples,
                                      int k1, int k2, int ja, int jb,
                                      const Hamiltonian& H, const Seed& seed,
                                      int max_attempts, int workers) {
  if (samples.size() < 500)
    throw std::invalid_argument("gibbs_invariance_test: need >= 500 samples");
  const TimeGrid& grid = samples.front().grid;
  const int n_curves = static_cast<int>(samples.front().curves.size());
  if (k1 < 1 || k2 > n_curves || k1 > k2)
    throw std::invalid_argument("gibbs_invariance_test: bad index window");
  if (ja < 0 || jb > grid.m || jb - ja < 2)
    throw std::invalid_argument("gibbs_invariance_test: bad sub-interval");

  const int mid = (ja + jb) / 2;
  const TimeGrid sub(grid.node(ja), grid.node(jb), jb - ja);
  const int n = static_cast<int>(samples.size());
  std::vector<double> orig_mid(static_cast<std::size_t>(n)), res_mid(static_cast<std::size_t>(n));
  std::vector<double> orig_inc(static_cast<std::size_t>(n)), res_inc(static_cast<std::size_t>(n));
  std::vector<char> failed(static_cast<std::size_t>(n), 0);
  CounterRng base(seed);

  parallel_for(n, workers, [&](int i) {
    const LineEnsemble& ens = samples[static_cast<std::size_t>(i)];
    const Path& lead = ens.curves[static_cast<std::size_t>(k1 - 1)];
    orig_mid[static_cast<std::size_t>(i)] = lead.values(mid);
    orig_inc[static_cast<std::size_t>(i)] = lead.values(mid) - lead.values(ja);

    BoundaryData bd;
    bd.k1 = k1;
    bd.k2 = k2;
    bd.entrance.resize(k2 - k1 + 1);
    bd.exit.resize(k2 - k1 + 1);
    for (int c = k1; c <= k2; ++c) {
      bd.entrance(c - k1) = ens.curves[static_cast<std::size_t>(c - 1)].values(ja);
      bd.exit(c - k1) = ens.curves[static_cast<std::size_t>(c - 1)].values(jb);
    }
    auto restrict_curve = [&](int idx) {
      return Path(sub, ens.curves[static_cast<std::size_t>(idx)].values.segment(ja, jb - ja + 1));
    };
    if (k1 >= 2) bd.f = restrict_curve(k1 - 2);
    if (k2 < n_curves) bd.g = restrict_curve(k2);

    CounterRng rng = base.fork(static_cast<std::uint64_t>(i));
    try {
      LineEnsemble redraw = rejection_sample(bd, H, sub, max_attempts, rng);
      const Path& rlead = redraw.curves.front();
      res_mid[static_cast<std::size_t>(i)] = rlead.values(mid - ja);
      res_inc[static_cast<std::size_t>(i)] = rlead.values(mid - ja) - rlead.values(0);
    } catch (const RejectionFailure&) {
      failed[static_cast<std::size_t>(i)] = 1;
    }
  });

  GibbsTestReport rep;
  std::vector<double> om, rm, oi, ri;
  int n_failed = 0;
  for (int i = 0; i < n; ++i) {
    if (failed[static_cast<std::size_t>(i)]) {
      ++n_failed;
      continue;
    }
    om.push_back(orig_mid[static_cast<std::size_t>(i)]);
    rm.push_back(res_mid[static_cast<std::size_t>(i)]);
    oi.push_back(orig_inc[static_cast<std::size_t>(i)]);
    ri.push_back(res_inc[static_cast<std::size_t>(i)]);
  }
  rep.rejection_failure_rate = static_cast<double>(n_failed) / n;
  if (rep.rejection_failure_rate > 0.5) {
    rep.testable = false;
    return rep;
  }
  rep.midpoint = ks_two_sample(om, rm);
  rep.increment = ks_two_sample(oi, ri);
  return rep;
}

}  // namespace kpzlab
