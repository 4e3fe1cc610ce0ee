#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kpzlab/polymer.hpp"
#include "kpzlab/stats.hpp"

using namespace kpzlab;

TEST_CASE("environment bookkeeping: cumulative sums of the increments") {
  BrownianEnvironment env = sample_environment(3, 1.0, 0.125, Seed{301, 0, 0});
  CHECK(env.steps == 8);
  for (int i = 1; i <= 3; ++i) {
    CHECK(env.motion(i, 0) == 0.0);
    for (int m = 1; m <= 8; ++m)
      CHECK(env.motion(i, m) ==
            doctest::Approx(env.motion(i, m - 1) + env.increments(i - 1, m - 1))
                .epsilon(1e-15));
  }
  CHECK(env.node_index(0.5) == 4);
  CHECK(env.node_index(1.0) == 8);
  CHECK_THROWS(env.node_index(0.51));
  CHECK_THROWS(env.node_index(1.2));
}

TEST_CASE("single level: log partition equals the compensated motion exactly") {
  BrownianEnvironment env = sample_environment(1, 2.0, 0.01, Seed{302, 0, 0});
  for (double beta : {1.0, 3.0}) {
    for (double s : {0.5, 1.0, 2.0}) {
      double expect = beta * env.motion(1, env.node_index(s)) - beta * beta * s / 2.0;
      CHECK(partition_single(env, 1, 1, s, beta) ==
            doctest::Approx(expect).epsilon(1e-12));
      CHECK(partition_single(env, 1, 1, s, beta, true) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("all-stay tuple: n = N hierarchy is the exact product of motions") {
  const int N = 6;
  BrownianEnvironment env = sample_environment(N, 1.0, 0.05, Seed{303, 0, 0});
  for (double s : {0.5, 1.0}) {
    double expect = -N * s / 2.0;
    for (int i = 1; i <= N; ++i) expect += env.motion(i, env.node_index(s));
    CHECK(partition_hierarchy(env, N, s) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("hierarchy at n = 1 reproduces the single-path partition function") {
  BrownianEnvironment env = sample_environment(4, 1.0, 0.02, Seed{304, 0, 0});
  CHECK(partition_hierarchy(env, 1, 1.0) ==
        doctest::Approx(partition_single(env, 1, 4, 1.0)).epsilon(1e-12));
}

TEST_CASE("free-energy curves telescope back to the hierarchy") {
  const int N = 5;
  BrownianEnvironment env = sample_environment(N, 1.0, 0.02, Seed{305, 0, 0});
  int m_end = env.steps;
  LineEnsemble ens = free_energy_ensemble(env, 3, env.node_index(0.5), m_end);
  int last = static_cast<int>(ens.curves[0].values.size()) - 1;
  double total = 0.0;
  for (int n = 0; n < 3; ++n) total += ens.curves[static_cast<std::size_t>(n)].values(last);
  CHECK(total == doctest::Approx(partition_hierarchy(env, 3, 1.0)).epsilon(1e-10));
  CHECK(ens.curves[0].values(last) ==
        doctest::Approx(partition_single(env, 1, N, 1.0)).epsilon(1e-12));
}

TEST_CASE("zero-temperature curves: full tuple uses every increment") {
  const int N = 4;
  BrownianEnvironment env = sample_environment(N, 1.0, 0.1, Seed{306, 0, 0});
  // nodes before N-1 cannot carry the N-1 jumps the top curve needs
  const int m0 = N - 1;
  LineEnsemble lpp = lpp_ensemble(env, N, m0, env.steps);
  for (int j = m0; j <= env.steps; ++j) {
    double total = 0.0;
    for (int n = 0; n < N; ++n)
      total += lpp.curves[static_cast<std::size_t>(n)].values(j - m0);
    double expect = 0.0;
    for (int i = 1; i <= N; ++i) expect += env.motion(i, j);
    CHECK(total == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("zero-temperature top value matches a brute-force jump search") {
  BrownianEnvironment env = sample_environment(2, 1.0, 0.05, Seed{307, 0, 0});
  LineEnsemble lpp = lpp_ensemble(env, 1, 1, env.steps);
  for (int m = 1; m <= env.steps; ++m) {
    // the jump column j+1 carries no increment on either level
    double best = -INFINITY;
    for (int j = 0; j < m; ++j)
      best = std::max(best, env.motion(1, j) + env.motion(2, m) - env.motion(2, j + 1));
    CHECK(lpp.curves[0].values(m - 1) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("scaled ensembles invert the centering identity exactly") {
  const int N = 24;
  ScaledEnsembleParams params;
  params.t = 1.0;
  params.N = N;
  double sc = params.s_center();
  BrownianEnvironment env =
      sample_environment(N, sc + 1.0, (sc + 1.0) / 1024, Seed{308, 0, 0});
  LineEnsemble fe = free_energy_ensemble(env, 2, env.steps - 256, env.steps);
  ScaledEnsembles se = scale_ensemble(fe, params);
  CHECK(se.unscaled.curves.size() == 2);
  int pts = static_cast<int>(se.unscaled.curves[0].values.size());
  for (int n = 0; n < 2; ++n)
    for (int j = 0; j < pts; ++j) {
      double h = se.unscaled.curves[static_cast<std::size_t>(n)].values(j);
      double hs = se.scaled.curves[static_cast<std::size_t>(n)].values(j);
      CHECK(hs == doctest::Approx((h + params.t / 24.0) / std::cbrt(params.t))
                      .epsilon(1e-12));
    }
  // grid of the unscaled window is centered: x = s - sqrt(tN)
  CHECK(se.unscaled.grid.b == doctest::Approx(env.s_max() - sc).epsilon(1e-9));
}

TEST_CASE("scaling rejects windows that cross s = 0") {
  ScaledEnsembleParams params;
  params.t = 4.0;
  params.N = 1;  // sqrt(tN) = 2, so a window starting at s=0 maps to x=-2
  BrownianEnvironment env = sample_environment(1, 4.0, 0.5, Seed{309, 0, 0});
  LineEnsemble fe = free_energy_ensemble(env, 1, 0, env.steps);
  CHECK_THROWS(scale_ensemble(fe, params));
}

TEST_CASE("strong-coupling limit of the polymer is the zero-temperature value") {
  const double beta = 64.0, s = 1.0;
  BrownianEnvironment env = sample_environment(5, s, 0.0025, Seed{310, 0, 0});
  LineEnsemble lpp = lpp_ensemble(env, 1, env.steps - 1, env.steps);
  double m1 = lpp.curves[0].values(1);
  double x1 = partition_single(env, 1, 5, s, beta);
  CHECK(std::abs((x1 + beta * beta * s / 2.0) / beta - m1) < 0.1);
}

TEST_CASE("top zero-temperature value follows the largest-eigenvalue law") {
  // For N = 2 the top value at time s is distributed as the largest
  // eigenvalue of a 2x2 Hermitian Gaussian matrix with entry variance s
  // on the diagonal and s/2 per real part off the diagonal.
  const int reps = 10000;
  const double s = 1.0;
  std::vector<double> lpp_vals, gue_vals;
  lpp_vals.reserve(reps);
  gue_vals.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    BrownianEnvironment env =
        sample_environment(2, s, 0.00025, Seed{311, static_cast<std::uint64_t>(r), 0});
    LineEnsemble lpp = lpp_ensemble(env, 1, env.steps - 1, env.steps);
    lpp_vals.push_back(lpp.curves[0].values(1));

    CounterRng rng(Seed{311, static_cast<std::uint64_t>(r), 1});
    double h11 = rng.normal() * std::sqrt(s);
    double h22 = rng.normal() * std::sqrt(s);
    double re = rng.normal() * std::sqrt(s / 2.0);
    double im = rng.normal() * std::sqrt(s / 2.0);
    double mid = (h11 + h22) / 2.0;
    double rad = std::sqrt((h11 - h22) * (h11 - h22) / 4.0 + re * re + im * im);
    gue_vals.push_back(mid + rad);
  }
  KsResult ks = ks_two_sample(lpp_vals, gue_vals);
  CHECK(ks.p_value > 0.01);
}
