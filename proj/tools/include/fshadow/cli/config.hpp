#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fshadow/circulant.hpp"
#include "fshadow/estimator.hpp"
#include "fshadow/fock.hpp"

namespace fshadow::cli {

using json = nlohmann::json;

enum class StateKind { cdw_hubbard, fock, amplitudes };

struct StatePrep {
  StateKind kind = StateKind::cdw_hubbard;
  double t0 = 1.5;
  double g_min = 0.2;
  double g_max = 0.7;
  std::uint64_t field_seed = 7;  // seeds the on-site field draw
  std::string occupation;        // fock kind, mode 0 leftmost
  std::filesystem::path amplitude_file;
};

struct OutputPaths {
  std::filesystem::path shots = "shots.csv";
  std::filesystem::path report = "report.json";
  std::filesystem::path csv_prefix = "report";  // <prefix>_targets.csv etc.
  std::filesystem::path svg_dir;                // empty: no SVG
};

struct ExperimentConfig {
  int L = 5;
  int L_anc = 2;
  circulant::EnsembleSpec ensemble = circulant::EnsembleSpec::uniform(7, 120.0);
  std::int64_t N = 20000;
  std::uint64_t seed = 1;
  int threads = 1;
  StatePrep state;
  std::vector<estimator::CorrelationTarget> targets;
  OutputPaths output;

  int L_tot() const { return L + L_anc; }
  void validate() const;

  json to_json() const;
  static ExperimentConfig from_json(const json& j);
  /// FNV-1a of the canonical JSON of the fields that determine the shots and
  /// the estimates. Output paths and thread count are excluded.
  std::string hash() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// Expands a target selector: "all_2pt" (every (i, j)), "row01_4pt" (every
/// <a0^dag a1^dag a_k a_l>), or an explicit {"creation": [...], "annihilation": [...]}.
std::vector<estimator::CorrelationTarget> expand_targets(const json& spec, int L);

/// Input state on the L physical modes, before ancilla embedding.
fock::StateVector prepare_state(const ExperimentConfig& cfg);

/// Loads {"modes": L, "re": [...], "im": [...]} and normalizes it.
fock::StateVector load_amplitudes(const std::filesystem::path& path);

std::filesystem::path default_cache_dir();

}  // namespace fshadow::cli
