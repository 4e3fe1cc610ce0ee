#include "kpzlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kpzlab/gibbs.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/polymer.hpp"
#include "kpzlab/she.hpp"
#include "kpzlab/spectra.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

namespace {

// Distinct stream tags so runner stages never share random draws.
enum Stream : std::uint64_t {
  kGibbsSamples = 1,
  kGibbsResample = 2,
  kSheScaling = 3,
  kEndpoint = 4,
  kTailNarrow = 5,
  kTailFlat = 6,
  kCoupling = 7,
  kCouplingNonConvex = 8,
  kTightness = 9,
  kPolymerRoute = 10,
  kSheRoute = 11,
};

struct ParamSpec {
  const char* key;
  const char* quick;
  const char* dflt;
  const char* paper;
};

const std::map<std::string, std::vector<ParamSpec>>& schemas() {
  static const std::map<std::string, std::vector<ParamSpec>> s = {
      {"gibbs-check",
       {{"source", "polymer", "polymer", "polymer"},
        {"replicates", "500", "500", "2000"},
        {"levels", "6", "6", "8"},
        {"hamiltonian_t", "1", "1", "1"},
        {"max_attempts", "2000", "2000", "4000"}}},
      {"scaling-study",
       {{"realizations", "60", "300", "1000"},
        {"dx", "0.05", "0.02", "0.02"},
        {"median_tol", "0.25", "0.2", "0.2"},
        {"contour_nodes", "128", "256", "384"}}},
      {"endpoint-study",
       {{"realizations", "50", "200", "500"},
        {"dx", "0.05", "0.02", "0.02"}}},
      {"tail-study",
       {{"samples", "1000", "10000", "40000"},
        {"flat_samples", "200", "1000", "4000"},
        {"dx", "0.05", "0.05", "0.02"},
        {"ratio_max", "0.7", "0.7", "0.7"},
        {"cross_tol", "0.08", "0.05", "0.05"},
        {"contour_nodes", "128", "256", "384"}}},
      {"coupling-study",
       {{"seeds", "5", "20", "40"},
        {"steps", "20000", "100000", "400000"},
        {"nc_seeds", "5", "10", "20"},
        {"nc_steps", "50000", "100000", "400000"}}},
      {"partition-tightness",
       {{"environments", "30", "100", "300"},
        {"dt_env", "0.01", "0.005", "0.002"},
        {"mc_samples", "100", "200", "500"},
        {"trend_tol", "0.05", "0.05", "0.05"}}},
      {"polymer-vs-she",
       {{"environments", "60", "200", "400"},
        {"dt_env", "0.01", "0.002", "0.001"},
        {"dx", "0.05", "0.02", "0.02"}}},
  };
  return s;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = std::stod(v, &pos);
  if (pos != v.size())
    throw std::invalid_argument("config: bad numeric value for " + key + ": " + v);
  return x;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  double pos = q * (static_cast<double>(xs.size()) - 1.0);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

double median(std::vector<double> xs) { return percentile(std::move(xs), 0.5); }

void add_result(RunReport& rep, const std::string& key, const std::string& value) {
  rep.results.emplace_back(key, value);
}

void add_result(RunReport& rep, const std::string& key, double value) {
  rep.results.emplace_back(key, format_double(value));
}

void add_verdict(RunReport& rep, const std::string& name, bool ok) {
  rep.verdicts.emplace_back(name, ok);
}

void finish(RunReport& rep) {
  rep.pass = true;
  for (const auto& [name, ok] : rep.verdicts) rep.pass = rep.pass && ok;
}

}  // namespace

int ExperimentConfig::get_int(const std::string& key) const {
  double x = get_double(key);
  int i = static_cast<int>(std::lround(x));
  if (std::abs(x - i) > 1e-9)
    throw std::invalid_argument("config: " + key + " must be an integer");
  return i;
}

double ExperimentConfig::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

std::string ExperimentConfig::get_string(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end())
    throw std::invalid_argument("config: missing parameter " + key);
  return it->second;
}

ExperimentConfig make_config(const std::string& subcommand,
                             const std::string& profile) {
  auto it = schemas().find(subcommand);
  if (it == schemas().end())
    throw std::invalid_argument("unknown subcommand: " + subcommand);
  if (profile != "quick" && profile != "default" && profile != "paper")
    throw std::invalid_argument("unknown profile: " + profile);
  ExperimentConfig c;
  c.subcommand = subcommand;
  c.profile = profile;
  for (const ParamSpec& p : it->second)
    c.params[p.key] = (profile == "quick") ? p.quick
                      : (profile == "paper") ? p.paper
                                             : p.dflt;
  return c;
}

void apply_overrides(ExperimentConfig& config,
                     const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key == "subcommand") {
      if (value != config.subcommand)
        throw std::invalid_argument("config: subcommand mismatch: " + value);
    } else if (key == "profile") {
      ExperimentConfig fresh = make_config(config.subcommand, value);
      // Reset schema defaults to the new profile, keeping prior explicit
      // values only where the caller re-specifies them later in the map.
      config.profile = value;
      config.params = fresh.params;
    } else if (key == "seed") {
      config.seed = std::stoull(value);
    } else if (key == "workers") {
      config.workers = std::stoi(value);
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else {
      if (config.params.find(key) == config.params.end())
        throw std::invalid_argument("config: unknown key for " +
                                    config.subcommand + ": " + key);
      config.params[key] = value;
    }
  }
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key=value, got: " + t);
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// gibbs-check

RunReport run_gibbs_check(const ExperimentConfig& config) {
  const std::string source = config.get_string("source");
  const int replicates = config.get_int("replicates");
  const int levels = config.get_int("levels");
  const double ht = config.get_double("hamiltonian_t");
  const int max_attempts = config.get_int("max_attempts");
  if (source != "free" && source != "h1" && source != "polymer")
    throw std::invalid_argument("gibbs-check: source must be free, h1, or polymer");

  RunReport rep;
  rep.subcommand = config.subcommand;
  const Seed base{config.seed, 0, kGibbsSamples};

  std::vector<LineEnsemble> samples(static_cast<std::size_t>(replicates));
  Hamiltonian test_h = Hamiltonian::special(ht);
  int ja = 0, jb = 0;
  if (source == "polymer") {
    const double dt = 0.01;
    const int m_lo = 100, m_hi = 200;  // window s in [1, 2]
    ja = 25;
    jb = 75;
    parallel_for(replicates, config.workers, [&](int r) {
      BrownianEnvironment env = sample_environment(
          levels, 2.0, dt, base.with_replicate(static_cast<std::uint64_t>(r)));
      samples[static_cast<std::size_t>(r)] =
          free_energy_ensemble(env, 2, m_lo, m_hi);
    });
  } else {
    const TimeGrid grid(0.0, 1.0, 40);
    ja = 10;
    jb = 30;
    BoundaryData bd;
    bd.k1 = 1;
    bd.k2 = 2;
    bd.entrance.resize(2);
    bd.exit.resize(2);
    bd.entrance << 0.0, -0.7;
    bd.exit << 0.0, -0.7;
    Hamiltonian gen_h = (source == "free") ? Hamiltonian::zero() : test_h;
    if (source == "free") test_h = Hamiltonian::zero();
    parallel_for(replicates, config.workers, [&](int r) {
      CounterRng rng(base.with_replicate(static_cast<std::uint64_t>(r)));
      samples[static_cast<std::size_t>(r)] =
          rejection_sample(bd, gen_h, grid, max_attempts, rng);
    });
  }

  GibbsTestReport test = gibbs_invariance_test(
      samples, 1, 1, ja, jb, test_h, Seed{config.seed, 0, kGibbsResample},
      max_attempts, config.workers);

  CsvTable table{"ks_table",
                 {"functional", "statistic", "p_value", "n", "m"},
                 {}};
  table.rows.push_back({"midpoint", format_double(test.midpoint.statistic),
                        format_double(test.midpoint.p_value),
                        std::to_string(test.midpoint.n),
                        std::to_string(test.midpoint.m)});
  table.rows.push_back({"increment", format_double(test.increment.statistic),
                        format_double(test.increment.p_value),
                        std::to_string(test.increment.n),
                        std::to_string(test.increment.m)});
  rep.tables.push_back(std::move(table));

  add_result(rep, "rejection_failure_rate", test.rejection_failure_rate);
  add_result(rep, "midpoint_p", test.midpoint.p_value);
  add_result(rep, "increment_p", test.increment.p_value);
  add_verdict(rep, "testable", test.testable);
  add_verdict(rep, "gibbs_invariance", test.pass(0.01));
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// scaling-study

namespace {

std::vector<double> she_scaled_samples(double t, double dx, int realizations,
                                       int workers, const Seed& base) {
  std::vector<double> out(static_cast<std::size_t>(realizations));
  const double dt = 0.25 * dx * dx;
  const double half = 6.0 * std::sqrt(t) + 1.0;
  parallel_for(realizations, workers, [&](int r) {
    SheField f = solve_mshe(InitialData::narrow_wedge(), t, dx, dt, half,
                            base.with_replicate(static_cast<std::uint64_t>(r)));
    if (f.floor_count > 0)
      throw std::runtime_error("she run clamped to the positivity floor");
    double h = std::log(f.Z(f.center));
    out[static_cast<std::size_t>(r)] = (h + t / 24.0) / std::cbrt(t);
  });
  return out;
}

double crossover_quantile(double t, double q, int contour_nodes) {
  ContourSpec c = ContourSpec::enclosing(36.0, contour_nodes);
  double lo = -4.0, hi = 3.0;
  for (int i = 0; i < 24; ++i) {
    double mid = 0.5 * (lo + hi);
    if (kpz_crossover_cdf(t, mid, c) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RunReport run_scaling_study(const ExperimentConfig& config) {
  const int realizations = config.get_int("realizations");
  const double dx = config.get_double("dx");
  const double median_tol = config.get_double("median_tol");
  const int contour_nodes = config.get_int("contour_nodes");

  RunReport rep;
  rep.subcommand = config.subcommand;
  const std::vector<double> t_grid{0.25, 0.5, 1.0, 2.0};
  CsvTable table{"scaling", {"t", "n", "mean", "stddev"}, {}};
  double sd_min = 0.0, sd_max = 0.0;
  double median_t1 = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double t = t_grid[i];
    Seed base{config.seed, 0, kSheScaling + 100 * (i + 1)};
    std::vector<double> xs =
        she_scaled_samples(t, dx, realizations, config.workers, base);
    double sd = std::sqrt(sample_variance(xs));
    if (i == 0) {
      sd_min = sd_max = sd;
    } else {
      sd_min = std::min(sd_min, sd);
      sd_max = std::max(sd_max, sd);
    }
    if (t == 1.0) median_t1 = median(xs);
    table.rows.push_back({format_double(t), std::to_string(realizations),
                          format_double(mean(xs)), format_double(sd)});
  }
  rep.tables.push_back(std::move(table));

  double ref_median = crossover_quantile(1.0, 0.5, contour_nodes);
  add_result(rep, "stddev_ratio", sd_max / sd_min);
  add_result(rep, "median_t1", median_t1);
  add_result(rep, "crossover_median_t1", ref_median);
  add_verdict(rep, "tightness_ratio_lt_3", sd_max / sd_min < 3.0);
  add_verdict(rep, "median_matches_crossover",
              std::abs(median_t1 - ref_median) < median_tol);
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// endpoint-study

RunReport run_endpoint_study(const ExperimentConfig& config) {
  const int realizations = config.get_int("realizations");
  const double dx = config.get_double("dx");

  RunReport rep;
  rep.subcommand = config.subcommand;
  const std::vector<double> t_grid{0.5, 1.0, 2.0};
  const std::vector<double> h_grid{0.01, 0.05, 0.5};
  CsvTable table{"endpoint", {"t", "median_radius90", "radius90_over_t23"}, {}};
  std::vector<double> ratios;
  std::vector<std::vector<double>> deloc(h_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double t = t_grid[i];
    double t23 = std::pow(t, 2.0 / 3.0);
    Seed base{config.seed, 0, kEndpoint + 100 * (i + 1)};
    std::vector<double> r90(static_cast<std::size_t>(realizations));
    std::vector<std::vector<double>> wm(h_grid.size());
    for (auto& v : wm) v.resize(static_cast<std::size_t>(realizations));
    const double dt = 0.25 * dx * dx;
    const double half = 6.0 * std::sqrt(t) + 1.0;
    parallel_for(realizations, config.workers, [&](int r) {
      SheField f =
          solve_mshe(InitialData::narrow_wedge(), t, dx, dt, half,
                     base.with_replicate(static_cast<std::uint64_t>(r)));
      Eigen::VectorXd p = endpoint_distribution(f);
      r90[static_cast<std::size_t>(r)] = mass_radius(f, p, 0.9);
      if (t == 1.0)
        for (std::size_t k = 0; k < h_grid.size(); ++k)
          wm[k][static_cast<std::size_t>(r)] =
              window_mass(f, p, 0.0, h_grid[k] * t23);
    });
    double med = median(r90);
    ratios.push_back(med / t23);
    if (t == 1.0) deloc = wm;
    table.rows.push_back(
        {format_double(t), format_double(med), format_double(med / t23)});
  }
  rep.tables.push_back(std::move(table));

  CsvTable dtab{"delocalization", {"h", "median_window_mass"}, {}};
  std::vector<double> dmed;
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    dmed.push_back(median(deloc[k]));
    dtab.rows.push_back({format_double(h_grid[k]), format_double(dmed.back())});
  }
  rep.tables.push_back(std::move(dtab));

  double rmin = *std::min_element(ratios.begin(), ratios.end());
  double rmax = *std::max_element(ratios.begin(), ratios.end());
  add_result(rep, "radius_ratio_spread", rmax / rmin);
  add_verdict(rep, "localization_factor2", rmax / rmin < 2.0);
  add_verdict(rep, "delocalization_monotone",
              dmed[0] <= dmed[1] && dmed[1] <= dmed[2]);
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// tail-study

RunReport run_tail_study(const ExperimentConfig& config) {
  const int samples = config.get_int("samples");
  const int flat_samples = config.get_int("flat_samples");
  const double dx = config.get_double("dx");
  const double ratio_max = config.get_double("ratio_max");
  const double cross_tol = config.get_double("cross_tol");
  const int contour_nodes = config.get_int("contour_nodes");

  RunReport rep;
  rep.subcommand = config.subcommand;
  const double t = 1.0;
  Seed base{config.seed, 0, kTailNarrow};
  std::vector<double> xs =
      she_scaled_samples(t, dx, samples, config.workers, base);

  const std::vector<double> thresholds{1.0, 2.0, 3.0};
  CsvTable table{"upper_tail", {"threshold", "count", "frequency", "kept"}, {}};
  std::vector<double> freq;
  std::vector<bool> kept;
  for (double th : thresholds) {
    long long count = std::count_if(xs.begin(), xs.end(),
                                    [th](double x) { return x > th; });
    bool keep = count >= 5;
    freq.push_back(static_cast<double>(count) / samples);
    kept.push_back(keep);
    if (!keep)
      add_result(rep, "note_threshold_" + format_double(th),
                 "dropped: fewer than 5 exceedances");
    table.rows.push_back({format_double(th), std::to_string(count),
                          format_double(freq.back()), keep ? "yes" : "no"});
  }
  rep.tables.push_back(std::move(table));

  bool geometric = true;
  for (std::size_t k = 0; k + 1 < freq.size(); ++k) {
    if (!kept[k] || !kept[k + 1]) continue;
    if (!(freq[k + 1] <= ratio_max * freq[k])) geometric = false;
  }
  add_verdict(rep, "geometric_decay", geometric);

  ContourSpec contour = ContourSpec::enclosing(36.0, contour_nodes);
  bool cross_ok = true;
  for (double s : {0.0, 1.0}) {
    double emp = static_cast<double>(std::count_if(
                     xs.begin(), xs.end(), [s](double x) { return x > s; })) /
                 samples;
    double ref = 1.0 - kpz_crossover_cdf(t, s, contour);
    add_result(rep, "tail_emp_s" + format_double(s), emp);
    add_result(rep, "tail_ref_s" + format_double(s), ref);
    if (std::abs(emp - ref) > cross_tol) cross_ok = false;
  }
  add_verdict(rep, "crossover_cross_check", cross_ok);

  // Flat initial data through the one-point convolution identity.
  Seed fbase{config.seed, 0, kTailFlat};
  std::vector<double> flat(static_cast<std::size_t>(flat_samples));
  const double dt = 0.25 * dx * dx;
  parallel_for(flat_samples, config.workers, [&](int r) {
    SheField f =
        solve_mshe(InitialData::narrow_wedge(), t, dx, dt, 6.0 + 2.0,
                   fbase.with_replicate(static_cast<std::uint64_t>(r)));
    flat[static_cast<std::size_t>(r)] =
        general_one_point(f, [](double) { return 0.0; }, 0.0);
  });
  double fm = median(flat);
  CsvTable ftab{"flat_tails", {"offset", "upper_freq", "lower_freq"}, {}};
  bool monotone = true;
  double prev_up = 1.0, prev_lo = 1.0;
  for (double k : {0.5, 1.0, 1.5}) {
    double up = static_cast<double>(std::count_if(
                    flat.begin(), flat.end(),
                    [&](double x) { return x > fm + k; })) /
                flat_samples;
    double lo = static_cast<double>(std::count_if(
                    flat.begin(), flat.end(),
                    [&](double x) { return x < fm - k; })) /
                flat_samples;
    if (up > prev_up || lo > prev_lo) monotone = false;
    prev_up = up;
    prev_lo = lo;
    ftab.rows.push_back(
        {format_double(k), format_double(up), format_double(lo)});
  }
  rep.tables.push_back(std::move(ftab));
  add_result(rep, "flat_median", fm);
  add_verdict(rep, "flat_tails_monotone", monotone);
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// coupling-study

namespace {

Hamiltonian bump_hamiltonian() {
  return Hamiltonian::tabulated(
      [](double x) {
        double z = (x - 0.6) / 0.25;
        return 4.0 * std::exp(-z * z);
      },
      false);
}

}  // namespace

RunReport run_coupling_study(const ExperimentConfig& config) {
  const int seeds = config.get_int("seeds");
  const long long steps = config.get_int("steps");
  const int nc_seeds = config.get_int("nc_seeds");
  const long long nc_steps = config.get_int("nc_steps");

  RunReport rep;
  rep.subcommand = config.subcommand;
  const DiscreteWalkEnsemble initial =
      DiscreteWalkEnsemble::minimal(2, 16, {0}, {0});
  const WalkBoundary bd_upper = WalkBoundary::constants({}, 0.0, 17);
  const WalkBoundary bd_lower = WalkBoundary::constants({}, -1.0, 17);
  const Hamiltonian h1 = Hamiltonian::special(1.0);

  std::vector<long long> violations(static_cast<std::size_t>(seeds));
  parallel_for(seeds, config.workers, [&](int s) {
    CoupledReport r = coupled_metropolis_run(
        initial, bd_upper, bd_lower, h1, steps,
        Seed{config.seed, static_cast<std::uint64_t>(s), kCoupling});
    violations[static_cast<std::size_t>(s)] = r.ordering_violations;
  });
  long long total = 0;
  CsvTable table{"coupling", {"seed", "violations"}, {}};
  for (int s = 0; s < seeds; ++s) {
    total += violations[static_cast<std::size_t>(s)];
    table.rows.push_back(
        {std::to_string(s), std::to_string(violations[static_cast<std::size_t>(s)])});
  }
  rep.tables.push_back(std::move(table));

  const Hamiltonian bump = bump_hamiltonian();
  long long nc_total = 0;
  std::vector<long long> ncv(static_cast<std::size_t>(nc_seeds));
  parallel_for(nc_seeds, config.workers, [&](int s) {
    CoupledReport r = coupled_metropolis_run(
        initial, bd_upper, bd_lower, bump, nc_steps,
        Seed{config.seed, static_cast<std::uint64_t>(s), kCouplingNonConvex});
    ncv[static_cast<std::size_t>(s)] = r.ordering_violations;
  });
  for (long long v : ncv) nc_total += v;

  add_result(rep, "convex_violations", std::to_string(total));
  add_result(rep, "nonconvex_violations", std::to_string(nc_total));
  add_verdict(rep, "convex_order_preserved", total == 0);
  add_verdict(rep, "nonconvex_counterexample", nc_total >= 1);
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// partition-tightness

RunReport run_partition_tightness(const ExperimentConfig& config) {
  const int environments = config.get_int("environments");
  const double dt_env = config.get_double("dt_env");
  const int mc_samples = config.get_int("mc_samples");
  const double trend_tol = config.get_double("trend_tol");

  RunReport rep;
  rep.subcommand = config.subcommand;
  const std::vector<int> n_grid{50, 100, 200};
  const Hamiltonian h1 = Hamiltonian::special(1.0);
  CsvTable table{"tightness", {"N", "p5", "median", "min", "max"}, {}};
  std::vector<double> p5s;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const int N = n_grid[i];
    const double center = std::sqrt(static_cast<double>(N));
    const int steps = static_cast<int>(std::lround((center + 1.0) / dt_env));
    const double dt = (center + 1.0) / steps;
    const int m_start = static_cast<int>(std::lround((center - 1.0) / dt));
    Seed base{config.seed, 0, kTightness + 100 * (i + 1)};
    std::vector<double> est(static_cast<std::size_t>(environments));
    parallel_for(environments, config.workers, [&](int e) {
      Seed es = base.with_replicate(static_cast<std::uint64_t>(e));
      BrownianEnvironment env =
          sample_environment(N, (center + 1.0), dt, es);
      LineEnsemble fe = free_energy_ensemble(env, 2, m_start, steps, 1.0, true);
      ScaledEnsembleParams sp{1.0, N};
      ScaledEnsembles scaled = scale_ensemble(fe, sp);
      const LineEnsemble& h = scaled.unscaled;
      BoundaryData bd;
      bd.k1 = 1;
      bd.k2 = 1;
      bd.entrance.resize(1);
      bd.exit.resize(1);
      bd.entrance << h.curves[0].values(0);
      bd.exit << h.curves[0].values(h.grid.m);
      bd.g = h.curves[1];
      PartitionEstimate pe = estimate_partition(bd, h1, h.grid, mc_samples,
                                                es.with_stream(kTightness + 50));
      est[static_cast<std::size_t>(e)] = pe.estimate;
    });
    double p5 = percentile(est, 0.05);
    p5s.push_back(p5);
    table.rows.push_back({std::to_string(N), format_double(p5),
                          format_double(median(est)),
                          format_double(*std::min_element(est.begin(), est.end())),
                          format_double(*std::max_element(est.begin(), est.end()))});
  }
  rep.tables.push_back(std::move(table));
  bool trend = p5s[1] >= p5s[0] - trend_tol && p5s[2] >= p5s[1] - trend_tol;
  add_result(rep, "p5_n50", p5s[0]);
  add_result(rep, "p5_n100", p5s[1]);
  add_result(rep, "p5_n200", p5s[2]);
  add_verdict(rep, "p5_nondecreasing", trend);
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// polymer-vs-she

RunReport run_polymer_vs_she(const ExperimentConfig& config) {
  const int environments = config.get_int("environments");
  const double dt_env = config.get_double("dt_env");
  const double dx = config.get_double("dx");

  RunReport rep;
  rep.subcommand = config.subcommand;
  const int N = 200;
  const double t = 1.0;
  const double center = std::sqrt(t * N);
  const int steps = static_cast<int>(std::lround(center / dt_env));
  const double dt = center / steps;
  const ScaledEnsembleParams sp{t, N};

  std::vector<double> poly(static_cast<std::size_t>(environments));
  Seed pbase{config.seed, 0, kPolymerRoute};
  parallel_for(environments, config.workers, [&](int e) {
    BrownianEnvironment env = sample_environment(
        N, center, dt, pbase.with_replicate(static_cast<std::uint64_t>(e)));
    double x1 = partition_single(env, 1, N, center, 1.0, true);
    double h = x1 + 0.5 * center - sp.log_c(0.0);
    poly[static_cast<std::size_t>(e)] = h + t / 24.0;
  });

  Seed sbase{config.seed, 0, kSheRoute};
  std::vector<double> she =
      she_scaled_samples(t, dx, environments, config.workers, sbase);

  KsResult ks = ks_two_sample(poly, she);
  CsvTable table{"one_point_samples", {"route", "value"}, {}};
  for (double v : poly) table.rows.push_back({"polymer", format_double(v)});
  for (double v : she) table.rows.push_back({"she", format_double(v)});
  rep.tables.push_back(std::move(table));

  add_result(rep, "ks_statistic", ks.statistic);
  add_result(rep, "ks_p", ks.p_value);
  add_result(rep, "polymer_mean", mean(poly));
  add_result(rep, "she_mean", mean(she));
  add_verdict(rep, "one_point_ks", ks.p_value > 0.01);
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "gibbs-check",       "scaling-study",  "endpoint-study", "tail-study",
      "coupling-study",    "partition-tightness", "polymer-vs-she"};
  return names;
}

RunReport run_experiment(const ExperimentConfig& config) {
  if (config.subcommand == "gibbs-check") return run_gibbs_check(config);
  if (config.subcommand == "scaling-study") return run_scaling_study(config);
  if (config.subcommand == "endpoint-study") return run_endpoint_study(config);
  if (config.subcommand == "tail-study") return run_tail_study(config);
  if (config.subcommand == "coupling-study") return run_coupling_study(config);
  if (config.subcommand == "partition-tightness")
    return run_partition_tightness(config);
  if (config.subcommand == "polymer-vs-she") return run_polymer_vs_she(config);
  throw std::invalid_argument("unknown subcommand: " + config.subcommand);
}

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << body;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string write_report(const RunReport& report, const ExperimentConfig& config,
                         double wall_seconds) {
  std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);

  for (const CsvTable& table : report.tables) {
    std::ostringstream csv;
    for (std::size_t c = 0; c < table.header.size(); ++c)
      csv << (c ? "," : "") << csv_quote(table.header[c]);
    csv << "\r\n";
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        csv << (c ? "," : "") << csv_quote(row[c]);
      csv << "\r\n";
    }
    write_atomic(dir / (report.subcommand + "." + table.name + ".csv"),
                 csv.str());
  }

  std::ostringstream m;
  m << "subcommand = " << config.subcommand << "\n";
  m << "profile = " << config.profile << "\n";
  m << "seed = " << config.seed << "\n";
  m << "workers = " << config.workers << "\n";
  for (const auto& [k, v] : config.params) m << k << " = " << v << "\n";
  m << "# artifact_version = 1\n";
  m << "# wall_clock_seconds = " << format_double(wall_seconds) << "\n";
  for (const auto& [k, v] : report.results) m << "# result." << k << " = " << v << "\n";
  for (const auto& [k, ok] : report.verdicts)
    m << "# verdict." << k << " = " << (ok ? "pass" : "fail") << "\n";
  m << "# pass = " << (report.pass ? "true" : "false") << "\n";
  std::filesystem::path mpath = dir / (report.subcommand + ".manifest.txt");
  write_atomic(mpath, m.str());
  return mpath.string();
}

}  // namespace kpzlab
