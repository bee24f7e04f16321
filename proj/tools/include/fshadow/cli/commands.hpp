#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fshadow/channel.hpp"
#include "fshadow/cli/config.hpp"
#include "fshadow/cli/report.hpp"
#include "fshadow/estimator.hpp"

namespace fshadow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSuiteFailure = 3;

// ---- gen-channel ----

struct GenChannelOptions {
  int k = 1;
  int L_tot = 5;
  std::filesystem::path cache_dir = default_cache_dir();
  int threads = 1;
  int max_L = channel::kM4MaxL;  // cost guard for k = 2
};

struct GenChannelResult {
  std::filesystem::path path;
  bool cache_hit = false;
  std::size_t d = 0;
  Eigen::Index rank = 0;
  std::string checksum;
};

/// Writes the cache unless a readable cache with matching (k, L) and checksum exists.
GenChannelResult gen_channel(const GenChannelOptions& opts);

// ---- run ----

/// Shots for the config: prepare, embed with L_anc vacuum ancillas, quench, measure.
std::vector<estimator::ShotRecord> run_protocol(const ExperimentConfig& cfg, std::int64_t first_id = 0);

struct RunOptions {
  bool append = false;  // continue an existing log from its next shot_id
  bool force = false;   // replace an existing log
};

/// Returns the number of shots written.
std::int64_t run_to_log(const ExperimentConfig& cfg, const RunOptions& opts);

// ---- estimate ----

struct EstimateOutputs {
  RecoveryReport report;
  std::vector<std::filesystem::path> files;
};

EstimateOutputs estimate_from_log(const ExperimentConfig& cfg, const std::filesystem::path& shot_log,
                                  const EstimateOptions& opts);

// ---- verify ----

struct SuiteCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::string suite;      // channel | estimator | design
  std::vector<int> Ls;    // empty: suite default
  std::int64_t shots = 20000;
  std::uint64_t seed = 2024;
  std::filesystem::path cache_dir = default_cache_dir();
  int threads = 1;
};

std::vector<SuiteCheck> run_suite(const VerifyOptions& opts);

// ---- reproduce ----

struct ReproduceOptions {
  std::string figure;  // fig2 | fig3 | app-var | app-sample-curves
  std::filesystem::path out_dir = "reproduce";
  bool full_scale = false;
  bool override_budget = false;
  std::int64_t budget = 2'000'000;  // shot budget across the preset's runs
  std::int64_t N = 0;               // 0: preset value
  std::uint64_t seed = 1;
  int threads = 1;
  bool svg = false;
  std::filesystem::path cache_dir = default_cache_dir();
};

struct ReproduceResult {
  std::vector<std::filesystem::path> files;
  json summary;
};

/// One experiment of a preset.
struct PresetRun {
  int L = 0;
  int L_anc = 0;
  double alpha_max = 0.0;
  std::int64_t N = 0;
  bool four_point = false;
};

std::vector<PresetRun> preset_runs(const ReproduceOptions& opts);
std::int64_t preset_cost(const std::vector<PresetRun>& runs);

/// Throws CostGuardError when the preset exceeds the budget without override.
ReproduceResult reproduce(const ReproduceOptions& opts, std::ostream& log);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// 1 for even L, 2 for odd L: the smallest count keeping L_tot odd that also
/// admits 4-point plans for L <= 5.
int default_ancillas(int L);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace fshadow::cli
