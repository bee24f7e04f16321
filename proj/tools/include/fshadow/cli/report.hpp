#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fshadow/channel.hpp"
#include "fshadow/cli/config.hpp"
#include "fshadow/estimator.hpp"

namespace fshadow::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct CacheUse {
  int k = 0;
  int L = 0;
  std::string file;
  std::string checksum;
};

/// Loads the channel cache for (k, L) from `dir`. When the file is missing it
/// is built and written if `build_missing`, otherwise IoError.
channel::ChannelMatrix obtain_channel(int k, int L, const std::filesystem::path& dir, bool build_missing,
                                      int threads = 1, CacheUse* use = nullptr);

struct TargetRow {
  estimator::CorrelationTarget target;
  estimator::cplx exact{0.0, 0.0};
  estimator::EstimateReport estimate;
  double abs_error = 0.0;
  double f_norm = 0.0;
  double certificate_residual = 0.0;
};

struct CurvePoint {
  std::int64_t N = 0;
  std::optional<double> ave_2pt;
  std::optional<double> ave_4pt;
};

struct RecoveryReport {
  std::string config_hash;
  json config;  // without output paths and thread count
  int L = 0;
  int L_tot = 0;
  std::int64_t N = 0;
  std::vector<TargetRow> rows;
  std::optional<double> ave_2pt;       // Ave(dO) over the declared 2-point targets
  std::optional<double> ave_4pt;       // same over the declared 4-point targets
  std::optional<double> variance_2pt;  // mean of Var(Re) + Var(Im)
  std::optional<double> variance_4pt;
  std::vector<CurvePoint> curve;
  std::vector<CacheUse> caches;
  std::string note;

  json to_json() const;
};

struct EstimateOptions {
  std::filesystem::path cache_dir = default_cache_dir();
  bool build_missing = false;
  int threads = 1;
  double delta = 0.05;
};

/// Plans for every target of the config. 4-point plans need the M^(4) cache.
std::vector<estimator::EstimatorPlan> build_plans(const ExperimentConfig& cfg, const EstimateOptions& opts,
                                                  std::vector<CacheUse>* caches = nullptr);

RecoveryReport estimate_report(const ExperimentConfig& cfg, const std::vector<estimator::ShotRecord>& shots,
                               const EstimateOptions& opts);

/// Prefix sizes at which the error-vs-N curve is sampled: 1-2-5 steps below N, then N.
std::vector<std::int64_t> curve_checkpoints(std::int64_t N);

void write_report_json(const std::filesystem::path& path, const RecoveryReport& report);
/// <prefix>_targets.csv, <prefix>_curve.csv, and the grids <prefix>_grid_2pt.csv /
/// <prefix>_grid_4pt.csv when the matching targets are present. Returns the files written.
std::vector<std::filesystem::path> write_report_csv(const std::filesystem::path& prefix, const RecoveryReport& report);
/// Heat maps of the grids and the error-vs-N curve.
std::vector<std::filesystem::path> write_report_svg(const std::filesystem::path& dir, const RecoveryReport& report);

}  // namespace fshadow::cli
