#include <iostream>

#include <CLI11.hpp>

#include "fshadow/cli/commands.hpp"
#include "fshadow/error.hpp"

namespace fshadow::cli {

namespace {

struct ConfigOverrides {
  std::string path;
  std::int64_t N = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  double alpha_max = 0.0;
};

void add_config_options(CLI::App* cmd, ConfigOverrides& o) {
  cmd->add_option("-c,--config", o.path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--N", o.N, "Override the shot count");
  cmd->add_option("--seed", o.seed, "Override the base seed")->each([&](const std::string&) { o.seed_set = true; });
  cmd->add_option("--threads", o.threads, "Override the worker lane count");
  cmd->add_option("--alpha-max", o.alpha_max, "Override alpha_max of a uniform ensemble");
}

ExperimentConfig resolve(const ConfigOverrides& o) {
  auto cfg = load_config(o.path);
  if (o.N > 0) cfg.N = o.N;
  if (o.seed_set) cfg.seed = o.seed;
  if (o.threads > 0) cfg.threads = o.threads;
  if (o.alpha_max > 0) {
    require(cfg.ensemble.kind == circulant::EnsembleKind::nn_uniform, "--alpha-max needs a uniform ensemble");
    cfg.ensemble.alpha_max = o.alpha_max;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Fermionic shadow estimation from circulant quenches"};
  app.require_subcommand(1);

  GenChannelOptions gen;
  std::string gen_cache;
  auto* g = app.add_subcommand("gen-channel", "Build or reuse a cached channel matrix");
  g->add_option("--k", gen.k, "1 for the 2-point block, 2 for the 4-point block")->check(CLI::IsMember({1, 2}));
  g->add_option("--L-tot", gen.L_tot, "Total mode count (odd)")->required();
  g->add_option("--cache-dir", gen_cache, "Cache directory (default: $FSHADOW_CACHE_DIR or ./fshadow-cache)");
  g->add_option("--threads", gen.threads, "Build threads");
  g->add_option("--max-L", gen.max_L, "Size guard for the 4-point build");

  ConfigOverrides run_o;
  RunOptions run_opts;
  std::string run_out;
  auto* r = app.add_subcommand("run", "Simulate the protocol and write a shot log");
  add_config_options(r, run_o);
  r->add_option("-o,--out", run_out, "Shot log path (default: config output.shots)");
  r->add_flag("--append", run_opts.append, "Continue an existing log");
  r->add_flag("--force", run_opts.force, "Replace an existing log");

  ConfigOverrides est_o;
  EstimateOptions est_opts;
  std::string est_shots, est_report, est_csv, est_svg, est_cache;
  auto* e = app.add_subcommand("estimate", "Recover correlators from a shot log");
  add_config_options(e, est_o);
  e->add_option("-s,--shots", est_shots, "Shot log (default: config output.shots)");
  e->add_option("--report", est_report, "JSON report path");
  e->add_option("--csv-prefix", est_csv, "Prefix for CSV outputs");
  e->add_option("--svg-dir", est_svg, "Directory for SVG plots");
  e->add_option("--cache-dir", est_cache, "Channel cache directory");
  e->add_flag("--build-missing", est_opts.build_missing, "Build a missing channel cache instead of failing");
  e->add_option("--delta", est_opts.delta, "Failure probability for the Hoeffding radius");

  VerifyOptions ver;
  std::string ver_cache;
  auto* v = app.add_subcommand("verify", "Run a verification suite");
  v->add_option("--suite", ver.suite, "channel, estimator or design")
      ->required()
      ->check(CLI::IsMember({"channel", "estimator", "design"}));
  v->add_option("--L", ver.Ls, "System sizes (default per suite)");
  v->add_option("--shots", ver.shots, "Shots for the estimator suite");
  v->add_option("--seed", ver.seed, "Seed for the estimator suite");
  v->add_option("--cache-dir", ver_cache, "Channel cache directory");
  v->add_option("--threads", ver.threads, "Worker lanes");

  ReproduceOptions rep;
  std::string rep_cache;
  auto* p = app.add_subcommand("reproduce", "Regenerate the data behind a figure");
  p->add_option("--figure", rep.figure, "fig2, fig3, app-var or app-sample-curves")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "app-var", "app-sample-curves"}));
  p->add_option("-o,--out", rep.out_dir, "Output directory");
  p->add_flag("--full-scale", rep.full_scale, "Use the full sizes and N = 150000");
  p->add_option("--budget", rep.budget, "Shot budget across the preset");
  p->add_flag("--override-budget", rep.override_budget, "Run even when the preset exceeds the budget");
  p->add_option("--N", rep.N, "Shots per run (default per preset)");
  p->add_option("--seed", rep.seed, "Base seed");
  p->add_option("--threads", rep.threads, "Worker lanes");
  p->add_flag("--svg", rep.svg, "Also write SVG plots");
  p->add_option("--cache-dir", rep_cache, "Channel cache directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*g) {
      if (!gen_cache.empty()) gen.cache_dir = gen_cache;
      const auto res = gen_channel(gen);
      std::cout << (res.cache_hit ? "cache hit: " : "wrote: ") << res.path.string() << "\n"
                << "k=" << gen.k << " L_tot=" << gen.L_tot << " d=" << res.d << " rank=" << res.rank
                << " checksum=" << res.checksum << "\n";
    } else if (*r) {
      auto cfg = resolve(run_o);
      if (!run_out.empty()) cfg.output.shots = run_out;
      const auto n = run_to_log(cfg, run_opts);
      std::cout << "wrote " << n << " shots to " << cfg.output.shots.string() << " (config " << cfg.hash() << ")\n";
    } else if (*e) {
      auto cfg = resolve(est_o);
      if (!est_report.empty()) cfg.output.report = est_report;
      if (!est_csv.empty()) cfg.output.csv_prefix = est_csv;
      if (!est_svg.empty()) cfg.output.svg_dir = est_svg;
      if (!est_cache.empty()) est_opts.cache_dir = est_cache;
      est_opts.threads = cfg.threads;
      const auto out = estimate_from_log(cfg, est_shots.empty() ? cfg.output.shots : std::filesystem::path(est_shots), est_opts);
      const auto& rep_ = out.report;
      std::cout << "shots: " << rep_.N << "  targets: " << rep_.rows.size() << "\n";
      if (rep_.ave_2pt) std::cout << "Ave(dO) 2-point: " << *rep_.ave_2pt << "  average variance: " << *rep_.variance_2pt << "\n";
      if (rep_.ave_4pt) std::cout << "Ave(dO) 4-point: " << *rep_.ave_4pt << "  average variance: " << *rep_.variance_4pt << "\n";
      for (const auto& f : out.files) std::cout << "wrote " << f.string() << "\n";
    } else if (*v) {
      if (!ver_cache.empty()) ver.cache_dir = ver_cache;
      const auto checks = run_suite(ver);
      int failed = 0;
      for (const auto& c : checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        if (!c.pass) ++failed;
      }
      std::cout << ver.suite << " suite: " << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size()
                << " passed\n";
      return failed ? kExitSuiteFailure : kExitOk;
    } else if (*p) {
      if (!rep_cache.empty()) rep.cache_dir = rep_cache;
      const auto res = reproduce(rep, std::cerr);
      std::cout << res.summary.dump(2) << "\n";
      for (const auto& f : res.files) std::cout << "wrote " << f.string() << "\n";
    }
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const IoError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const CostGuardError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const InfeasiblePlanError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace fshadow::cli
