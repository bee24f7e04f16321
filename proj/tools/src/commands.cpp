#include "fshadow/cli/commands.hpp"

#include <cmath>

#include "fshadow/cli/shot_log.hpp"
#include "fshadow/error.hpp"

namespace fshadow::cli {

GenChannelResult gen_channel(const GenChannelOptions& opts) {
  require(opts.k == 1 || opts.k == 2, "k must be 1 or 2");
  require(opts.L_tot >= 3 && opts.L_tot % 2 == 1, "L_tot must be odd and at least 3");
  if (opts.k == 2 && opts.L_tot > opts.max_L)
    throw CostGuardError("M4 build at L_tot = " + std::to_string(opts.L_tot) + " exceeds the guard L_tot <= " +
                         std::to_string(opts.max_L));
  GenChannelResult res;
  res.path = channel::channel_cache_path(opts.cache_dir, opts.k, opts.L_tot);
  std::optional<channel::ChannelMatrix> M;
  channel::CacheHeader header;
  if (std::filesystem::exists(res.path)) {
    try {
      auto cached = channel::load_channel(res.path, &header);
      if (header.k == opts.k && header.L == opts.L_tot) {
        M = std::move(cached);
        res.cache_hit = true;
      }
    } catch (const IoError&) {
      // unreadable or corrupt: rebuilt below
    }
  }
  if (!M) {
    std::filesystem::create_directories(opts.cache_dir);
    channel::M4BuildOptions build;
    build.threads = opts.threads;
    build.max_L = opts.max_L;
    channel::save_channel(res.path, opts.k == 1 ? channel::m2_matrix(opts.L_tot) : channel::m4_matrix(opts.L_tot, build));
    M = channel::load_channel(res.path, &header);
  }
  res.d = M->dimension();
  res.rank = M->rank();
  res.checksum = header.checksum;
  return res;
}

std::vector<estimator::ShotRecord> run_protocol(const ExperimentConfig& cfg, std::int64_t first_id) {
  cfg.validate();
  const auto big = fock::embed_with_ancillas(prepare_state(cfg), cfg.L_anc);
  return estimator::generate_shots(big, cfg.ensemble, cfg.N, cfg.seed, cfg.threads, first_id);
}

std::int64_t run_to_log(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const auto& path = cfg.output.shots;
  std::int64_t first_id = 0;
  if (std::filesystem::exists(path)) {
    if (opts.append) {
      const auto existing = read_shot_log(path);
      for (std::size_t i = 0; i < existing.size(); ++i) {
        require(existing[i].shot_id == static_cast<std::int64_t>(i), "existing shot log ids are not contiguous");
        require(existing[i].outcome.size() == cfg.L_tot(), "existing shot log has a different L_tot");
      }
      first_id = static_cast<std::int64_t>(existing.size());
    } else if (opts.force) {
      std::filesystem::remove(path);
    } else {
      throw ValidationError("shot log " + path.string() + " exists; pass --append to extend it or --force to replace it");
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto shots = run_protocol(cfg, first_id);
  append_shot_log(path, shots);
  return static_cast<std::int64_t>(shots.size());
}

EstimateOutputs estimate_from_log(const ExperimentConfig& cfg, const std::filesystem::path& shot_log,
                                  const EstimateOptions& opts) {
  EstimateOutputs out;
  out.report = estimate_report(cfg, read_shot_log(shot_log), opts);
  write_report_json(cfg.output.report, out.report);
  out.files.push_back(cfg.output.report);
  for (auto& f : write_report_csv(cfg.output.csv_prefix, out.report)) out.files.push_back(f);
  if (!cfg.output.svg_dir.empty())
    for (auto& f : write_report_svg(cfg.output.svg_dir, out.report)) out.files.push_back(f);
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, "log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  require(sxx > 0, "slope fit needs distinct x values");
  return sxy / sxx;
}

int default_ancillas(int L) { return L % 2 == 0 ? 1 : 2; }

}  // namespace fshadow::cli
