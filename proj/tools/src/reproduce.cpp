#include <fstream>
#include <map>
#include <ostream>

#include "fshadow/cli/commands.hpp"
#include "fshadow/cli/shot_log.hpp"
#include "fshadow/cli/svg.hpp"
#include "fshadow/error.hpp"

namespace fshadow::cli {

namespace {

constexpr double kSlopeLow = 0.2, kSlopeHigh = 0.8;

std::vector<PresetRun> grid_runs(const std::vector<double>& alphas, const std::vector<int>& Ls, std::int64_t N,
                                 bool four_point) {
  std::vector<PresetRun> runs;
  for (double a : alphas)
    for (int L : Ls) runs.push_back({L, default_ancillas(L), a, N, four_point});
  return runs;
}

// L = 3 holds a single particle, so its 4-point correlators vanish identically;
// L = 4 (L_tot = 5) keeps the small end of the curve informative.
std::vector<int> four_point_sizes(bool full) { return full ? std::vector<int>{3, 4, 5, 7} : std::vector<int>{3, 4, 5}; }

ExperimentConfig config_for(const PresetRun& run, const ReproduceOptions& opts, std::size_t index) {
  ExperimentConfig cfg;
  cfg.L = run.L;
  cfg.L_anc = run.L_anc;
  cfg.ensemble = circulant::EnsembleSpec::uniform(cfg.L_tot(), run.alpha_max);
  cfg.N = run.N;
  cfg.seed = opts.seed + 1000 * static_cast<std::uint64_t>(index);
  cfg.threads = opts.threads;
  cfg.targets = expand_targets(json::array({run.four_point ? "row01_4pt" : "all_2pt"}), run.L);
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& text, std::vector<std::filesystem::path>& files) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  files.push_back(path);
}

std::string f(double v) { return format_double(v); }

}  // namespace

std::vector<PresetRun> preset_runs(const ReproduceOptions& opts) {
  const bool full = opts.full_scale;
  const std::int64_t N = opts.N > 0 ? opts.N : (full ? 150000 : 20000);
  std::vector<PresetRun> runs;
  if (opts.figure == "fig2") {
    const std::int64_t n2 = opts.N > 0 ? opts.N : 5000;
    runs = {{5, 2, 120.0, n2, false}, {5, 2, 120.0, n2, true}};
  } else if (opts.figure == "fig3") {
    runs = full ? grid_runs({20, 70, 120, 1500}, {3, 4, 5, 6, 7, 8}, N, false)
                : grid_runs({20, 70, 120}, {3, 4, 5}, N, false);
  } else if (opts.figure == "app-var") {
    runs = grid_runs({120}, {3, 4, 5, 6, 7, 8}, N, false);
    for (auto& r : grid_runs({120}, four_point_sizes(full), N, true)) runs.push_back(r);
  } else if (opts.figure == "app-sample-curves") {
    runs = grid_runs({20, 70, 120, 1500}, full ? std::vector<int>{3, 4, 5, 6, 7, 8} : std::vector<int>{3, 4, 5}, N, false);
    for (auto& r : grid_runs({70, 120}, four_point_sizes(full), N, true)) runs.push_back(r);
  } else {
    throw ValidationError("unknown figure '" + opts.figure + "' (expected fig2, fig3, app-var or app-sample-curves)");
  }
  return runs;
}

std::int64_t preset_cost(const std::vector<PresetRun>& runs) {
  std::int64_t total = 0;
  for (const auto& r : runs) total += r.N;
  return total;
}

ReproduceResult reproduce(const ReproduceOptions& opts, std::ostream& log) {
  const auto runs = preset_runs(opts);
  const std::int64_t cost = preset_cost(runs);
  if (cost > opts.budget && !opts.override_budget)
    throw CostGuardError("preset " + opts.figure + " needs " + std::to_string(cost) + " shots, above the budget of " +
                         std::to_string(opts.budget) + "; pass --override-budget to run it anyway");

  ReproduceResult res;
  res.summary = {{"figure", opts.figure},
                 {"scale", opts.full_scale ? "full" : "desk"},
                 {"shots_total", cost},
                 {"note", opts.full_scale ? "full-scale parameters"
                                          : "desk scale: fewer shots than the full-scale 150000, so shot noise of order "
                                            "sqrt(variance / N) widens every comparison band"}};
  const auto dir = opts.out_dir;
  std::filesystem::create_directories(dir);

  EstimateOptions eo;
  eo.cache_dir = opts.cache_dir;
  eo.build_missing = true;
  eo.threads = opts.threads;

  std::vector<RecoveryReport> reports;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    log << "[" << i + 1 << "/" << runs.size() << "] L=" << run.L << " L_tot=" << run.L + run.L_anc
        << " alpha_max=" << run.alpha_max << " N=" << run.N << (run.four_point ? " 4-point" : " 2-point") << std::endl;
    const auto cfg = config_for(run, opts, i);
    reports.push_back(estimate_report(cfg, run_protocol(cfg), eo));
  }

  if (opts.figure == "fig2") {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto stem = dir / (runs[i].four_point ? "fig2_4pt" : "fig2_2pt");
      for (auto& p : write_report_csv(stem, reports[i])) res.files.push_back(p);
      if (opts.svg)
        for (auto& p : write_report_svg(dir / (runs[i].four_point ? "fig2_4pt_svg" : "fig2_2pt_svg"), reports[i]))
          res.files.push_back(p);
    }
    res.summary["ave_delta_2pt"] = *reports[0].ave_2pt;
    res.summary["ave_delta_4pt"] = *reports[1].ave_4pt;
  } else if (opts.figure == "fig3") {
    std::string csv = "alpha_max,L,L_tot,N,ave_delta_2pt,average_variance_2pt\n";
    std::map<double, svg::Series> err;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& r = reports[i];
      csv += f(runs[i].alpha_max) + ',' + std::to_string(r.L) + ',' + std::to_string(r.L_tot) + ',' +
             std::to_string(r.N) + ',' + f(*r.ave_2pt) + ',' + f(*r.variance_2pt) + '\n';
      auto& s = err[runs[i].alpha_max];
      s.name = "alpha_max=" + f(runs[i].alpha_max);
      s.x.push_back(r.L);
      s.y.push_back(*r.ave_2pt);
    }
    write_file(dir / "fig3_ave_error.csv", csv, res.files);
    if (opts.svg) {
      std::vector<svg::Series> series;
      for (auto& [a, s] : err) series.push_back(s);
      write_file(dir / "fig3_ave_error.svg",
                 svg::line_plot({"Ave(dO_ij) vs L", "L", "Ave(dO_ij)", false, true}, series), res.files);
    }
  } else if (opts.figure == "app-var") {
    for (bool four : {false, true}) {
      std::string csv = "L,L_tot,N,average_variance\n";
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].four_point != four) continue;
        const auto& r = reports[i];
        const double v = four ? *r.variance_4pt : *r.variance_2pt;
        csv += std::to_string(r.L) + ',' + std::to_string(r.L_tot) + ',' + std::to_string(r.N) + ',' + f(v) + '\n';
        // a vanishing variance (no 4-point content at that size) has no logarithm
        if (v <= 1e-20) continue;
        xs.push_back(r.L);
        ys.push_back(v);
      }
      const double slope = loglog_slope(xs, ys);
      const std::string kind = four ? "4pt" : "2pt";
      write_file(dir / ("app_var_" + kind + ".csv"), csv, res.files);
      res.summary["slope_" + kind] = slope;
      res.summary["fit_sizes_" + kind] = xs;
      if (!four) {
        res.summary["slope_2pt_band"] = {kSlopeLow, kSlopeHigh};
        res.summary["slope_2pt_in_band"] = slope >= kSlopeLow && slope <= kSlopeHigh;
      }
      if (opts.svg)
        write_file(dir / ("app_var_" + kind + ".svg"),
                   svg::line_plot({"average variance vs L (" + kind + "), slope " + f(slope), "L", "average variance",
                                   true, true},
                                  {{kind, xs, ys}}),
                   res.files);
    }
    std::string fit = "kind,slope\n2pt," + f(res.summary["slope_2pt"].get<double>()) + "\n4pt," +
                      f(res.summary["slope_4pt"].get<double>()) + "\n";
    write_file(dir / "app_var_fit.csv", fit, res.files);
  } else {
    for (bool four : {false, true}) {
      std::string csv = "alpha_max,L,L_tot,N,ave_delta\n";
      std::map<double, std::vector<svg::Series>> per_alpha;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].four_point != four) continue;
        const auto& r = reports[i];
        svg::Series s{"L=" + std::to_string(r.L), {}, {}};
        for (const auto& pt : r.curve) {
          const double v = four ? *pt.ave_4pt : *pt.ave_2pt;
          csv += f(runs[i].alpha_max) + ',' + std::to_string(r.L) + ',' + std::to_string(r.L_tot) + ',' +
                 std::to_string(pt.N) + ',' + f(v) + '\n';
          s.x.push_back(static_cast<double>(pt.N));
          s.y.push_back(v);
        }
        per_alpha[runs[i].alpha_max].push_back(s);
      }
      const std::string kind = four ? "4pt" : "2pt";
      write_file(dir / ("sample_curves_" + kind + ".csv"), csv, res.files);
      if (opts.svg)
        for (auto& [a, series] : per_alpha)
          write_file(dir / ("sample_curves_" + kind + "_alpha" + f(a) + ".svg"),
                     svg::line_plot({"Ave(dO) vs N (" + kind + ", alpha_max=" + f(a) + ")", "N", "Ave(dO)", true, true},
                                    series),
                     res.files);
    }
  }
  write_file(dir / (opts.figure + "_summary.json"), res.summary.dump(2) + "\n", res.files);
  return res;
}

}  // namespace fshadow::cli
