#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kpzlab {

/// Parameters of one CLI run. Every parameter is validated against the
/// subcommand's schema; unknown keys are rejected up front.
struct ExperimentConfig {
  std::string subcommand;
  std::string profile = "default";  // quick | default | paper
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int workers = 1;
  std::map<std::string, std::string> params;

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::string get_string(const std::string& key) const;
};

/// Config pre-filled with the subcommand's schema defaults for the profile.
/// Throws on unknown subcommand or profile.
ExperimentConfig make_config(const std::string& subcommand,
                             const std::string& profile);

/// Applies key=value overrides; throws on keys outside the schema. The
/// reserved keys subcommand/profile/seed/workers/out_dir are also accepted,
/// which lets a previously written manifest be replayed as a config file.
void apply_overrides(ExperimentConfig& config,
                     const std::map<std::string, std::string>& overrides);

/// Plain-text key=value config format; '#' starts a comment, blanks ignored.
std::map<std::string, std::string> parse_config_file(const std::string& path);

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct RunReport {
  std::string subcommand;
  bool pass = false;
  std::vector<std::pair<std::string, std::string>> results;
  std::vector<std::pair<std::string, bool>> verdicts;
  std::vector<CsvTable> tables;
};

RunReport run_gibbs_check(const ExperimentConfig& config);
RunReport run_scaling_study(const ExperimentConfig& config);
RunReport run_endpoint_study(const ExperimentConfig& config);
RunReport run_tail_study(const ExperimentConfig& config);
RunReport run_coupling_study(const ExperimentConfig& config);
RunReport run_partition_tightness(const ExperimentConfig& config);
RunReport run_polymer_vs_she(const ExperimentConfig& config);

/// Dispatch by config.subcommand.
RunReport run_experiment(const ExperimentConfig& config);

const std::vector<std::string>& experiment_names();

/// Writes one CSV per table plus a manifest (config echo as replayable
/// key=value lines, '#'-prefixed result/verdict lines). All files are
/// written atomically (temp file + rename). Returns the manifest path.
std::string write_report(const RunReport& report, const ExperimentConfig& config,
                         double wall_seconds);

/// RFC-4180 field quoting.
std::string csv_quote(const std::string& field);

/// Shortest round-trip decimal form of x (deterministic across runs).
std::string format_double(double x);

}  // namespace kpzlab
