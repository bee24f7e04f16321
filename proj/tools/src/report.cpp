#include "fshadow/cli/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "fshadow/cli/shot_log.hpp"
#include "fshadow/cli/svg.hpp"
#include "fshadow/error.hpp"

namespace fshadow::cli {

using estimator::cplx;

channel::ChannelMatrix obtain_channel(int k, int L, const std::filesystem::path& dir, bool build_missing, int threads,
                                      CacheUse* use) {
  require(k == 1 || k == 2, "channel order k must be 1 or 2");
  const auto path = channel::channel_cache_path(dir, k, L);
  if (!std::filesystem::exists(path)) {
    if (!build_missing)
      throw IoError("missing channel cache " + path.string() + "; run `fshadow gen-channel --k " + std::to_string(k) +
                    " --L-tot " + std::to_string(L) + "`");
    std::filesystem::create_directories(dir);
    channel::M4BuildOptions opts;
    opts.threads = threads;
    channel::save_channel(path, k == 1 ? channel::m2_matrix(L) : channel::m4_matrix(L, opts));
  }
  channel::CacheHeader header;
  auto M = channel::load_channel(path, &header);
  require(header.k == k && header.L == L, "channel cache " + path.string() + " holds a different (k, L)");
  if (use) *use = {k, L, path.filename().string(), header.checksum};
  return M;
}

namespace {

// Sorts an index list, returning the permutation parity, or 0 on a repeat.
int sort_with_sign(std::vector<int>& v) {
  int sign = 1;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = 0; b + 1 < v.size() - a; ++b)
      if (v[b] > v[b + 1]) {
        std::swap(v[b], v[b + 1]);
        sign = -sign;
      }
  for (std::size_t a = 0; a + 1 < v.size(); ++a)
    if (v[a] == v[a + 1]) return 0;
  return sign;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t r = 0; r < v.size(); ++r) s += (r ? ";" : "") + std::to_string(v[r]);
  return s;
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// Rows of the 2-point grid (all i, j) or the 4-point grid <a0^dag a1^dag a_k a_l>,
// indexed [row][col]; empty when the target set does not cover the grid.
std::vector<std::vector<const TargetRow*>> grid(const RecoveryReport& r, int k) {
  std::vector<std::vector<const TargetRow*>> g(static_cast<std::size_t>(r.L),
                                               std::vector<const TargetRow*>(static_cast<std::size_t>(r.L), nullptr));
  std::size_t filled = 0;
  for (const auto& row : r.rows) {
    const auto& t = row.target;
    if (t.k != k) continue;
    if (k == 2 && !(t.creation[0] == 0 && t.creation[1] == 1)) continue;
    auto& cell = k == 1 ? g[t.creation[0]][t.annihilation[0]] : g[t.annihilation[0]][t.annihilation[1]];
    if (!cell) ++filled;
    cell = &row;
  }
  if (filled != static_cast<std::size_t>(r.L * r.L)) g.clear();
  return g;
}

}  // namespace

std::vector<estimator::EstimatorPlan> build_plans(const ExperimentConfig& cfg, const EstimateOptions& opts,
                                                  std::vector<CacheUse>* caches) {
  cfg.validate();
  std::vector<estimator::EstimatorPlan> plans;
  std::optional<channel::ChannelMatrix> M4;
  std::map<std::pair<std::vector<int>, std::vector<int>>, estimator::EstimatorPlan> memo;
  for (const auto& t : cfg.targets) {
    if (t.k == 1) {
      plans.push_back(estimator::plan_2pt(t.creation[0], t.annihilation[0], cfg.L, cfg.L_anc));
      continue;
    }
    if (!M4) {
      CacheUse use;
      M4 = obtain_channel(2, cfg.L_tot(), opts.cache_dir, opts.build_missing, opts.threads, &use);
      if (caches) caches->push_back(use);
    }
    auto cr = t.creation, an = t.annihilation;
    const int sign = sort_with_sign(cr) * sort_with_sign(an);
    if (sign == 0) {
      plans.push_back(estimator::plan_4pt(t, cfg.L, cfg.L_anc, *M4));
      continue;
    }
    auto key = std::make_pair(cr, an);
    auto it = memo.find(key);
    if (it == memo.end())
      it = memo.emplace(key, estimator::plan_4pt(estimator::CorrelationTarget{2, cr, an}, cfg.L, cfg.L_anc, *M4))
               .first;
    auto plan = it->second;
    plan.target = t;
    if (sign < 0) plan.coefficients = -plan.coefficients;
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<std::int64_t> curve_checkpoints(std::int64_t N) {
  std::vector<std::int64_t> out;
  for (std::int64_t decade = 1; decade < N; decade *= 10)
    for (std::int64_t m : {1, 2, 5})
      if (decade * m >= 10 && decade * m < N) out.push_back(decade * m);
  out.push_back(N);
  return out;
}

RecoveryReport estimate_report(const ExperimentConfig& cfg, const std::vector<estimator::ShotRecord>& shots,
                               const EstimateOptions& opts) {
  cfg.validate();
  require(!shots.empty(), "shot log is empty");
  const bool haar = cfg.ensemble.kind == circulant::EnsembleKind::haar_cusym;
  for (const auto& s : shots) {
    require(s.outcome.size() == cfg.L_tot(), "shot outcome length differs from L_tot of the config");
    require(haar != s.alpha.has_value(), "shot log ensemble column does not match the configured ensemble");
  }

  RecoveryReport r;
  r.config_hash = cfg.hash();
  r.config = cfg.to_json();
  r.config.erase("output");
  r.config.erase("threads");
  r.L = cfg.L;
  r.L_tot = cfg.L_tot();
  r.N = static_cast<std::int64_t>(shots.size());

  const auto plans = build_plans(cfg, opts, &r.caches);
  const auto values = estimator::evaluate_shots(plans, shots, opts.threads);
  const auto psi = prepare_state(cfg);

  std::vector<double> err2, err4, var2, var4;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    TargetRow row;
    row.target = cfg.targets[p];
    row.f_norm = estimator::f_norm(plans[p]);
    row.certificate_residual = plans[p].certificate_residual;
    row.estimate = estimator::aggregate_values(values[p], row.f_norm, opts.delta);
    row.exact = fock::exact_correlator(psi, row.target.creation, row.target.annihilation);
    row.abs_error = std::abs(row.estimate.mean - row.exact);
    (row.target.k == 1 ? err2 : err4).push_back(row.abs_error);
    (row.target.k == 1 ? var2 : var4).push_back(row.estimate.variance);
    r.rows.push_back(row);
  }
  r.ave_2pt = mean_of(err2);
  r.ave_4pt = mean_of(err4);
  r.variance_2pt = mean_of(var2);
  r.variance_4pt = mean_of(var4);

  for (std::int64_t n : curve_checkpoints(r.N)) {
    std::vector<double> e2, e4;
    for (std::size_t p = 0; p < plans.size(); ++p) {
      const cplx mean = estimator::pairwise_sum(values[p].data(), static_cast<std::size_t>(n)) / static_cast<double>(n);
      (r.rows[p].target.k == 1 ? e2 : e4).push_back(std::abs(mean - r.rows[p].exact));
    }
    r.curve.push_back({n, mean_of(e2), mean_of(e4)});
  }
  r.note = "errors include shot noise of order sqrt(variance / N); with few shots, compare against that scale";
  return r;
}

json RecoveryReport::to_json() const {
  json rows_json = json::array();
  for (const auto& row : rows)
    rows_json.push_back({{"k", row.target.k},
                         {"creation", row.target.creation},
                         {"annihilation", row.target.annihilation},
                         {"exact", cplx_json(row.exact)},
                         {"estimate", cplx_json(row.estimate.mean)},
                         {"abs_error", row.abs_error},
                         {"variance", row.estimate.variance},
                         {"standard_error", row.estimate.standard_error()},
                         {"hoeffding_epsilon", row.estimate.hoeffding_epsilon},
                         {"f_norm", row.f_norm},
                         {"certificate_residual", row.certificate_residual}});
  json curve_json = json::array();
  for (const auto& c : curve) curve_json.push_back({{"N", c.N}, {"ave_delta_2pt", c.ave_2pt ? json(*c.ave_2pt) : json()},
                                                    {"ave_delta_4pt", c.ave_4pt ? json(*c.ave_4pt) : json()}});
  json cache_json = json::array();
  for (const auto& c : caches)
    cache_json.push_back({{"k", c.k}, {"L", c.L}, {"file", c.file}, {"checksum", c.checksum}});
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  return {{"metadata",
           {{"tool_version", kToolVersion},
            {"channel_cache_format", channel::kCacheFormatVersion},
            {"config_hash", config_hash},
            {"channel_caches", cache_json},
            {"note", note}}},
          {"config", config},
          {"L", L},
          {"L_tot", L_tot},
          {"N", N},
          {"aggregates",
           {{"ave_delta_2pt", opt(ave_2pt)},
            {"ave_delta_4pt", opt(ave_4pt)},
            {"average_variance_2pt", opt(variance_2pt)},
            {"average_variance_4pt", opt(variance_4pt)}}},
          {"targets", rows_json},
          {"curve", curve_json}};
}

void write_report_json(const std::filesystem::path& path, const RecoveryReport& report) {
  write_text(path, report.to_json().dump(2) + "\n");
}

std::vector<std::filesystem::path> write_report_csv(const std::filesystem::path& prefix, const RecoveryReport& r) {
  std::vector<std::filesystem::path> files;
  auto emit = [&](const std::string& suffix, const std::string& text) {
    std::filesystem::path p = prefix;
    p += suffix;
    write_text(p, text);
    files.push_back(p);
  };

  std::string t = "k,creation,annihilation,exact_re,exact_im,estimate_re,estimate_im,abs_error,variance,"
                  "standard_error,hoeffding_epsilon,f_norm\n";
  for (const auto& row : r.rows)
    t += std::to_string(row.target.k) + ',' + join(row.target.creation) + ',' + join(row.target.annihilation) + ',' +
         format_double(row.exact.real()) + ',' + format_double(row.exact.imag()) + ',' +
         format_double(row.estimate.mean.real()) + ',' + format_double(row.estimate.mean.imag()) + ',' +
         format_double(row.abs_error) + ',' + format_double(row.estimate.variance) + ',' +
         format_double(row.estimate.standard_error()) + ',' + format_double(row.estimate.hoeffding_epsilon) + ',' +
         format_double(row.f_norm) + '\n';
  emit("_targets.csv", t);

  std::string c = "N,ave_delta_2pt,ave_delta_4pt\n";
  for (const auto& pt : r.curve) c += std::to_string(pt.N) + ',' + opt_field(pt.ave_2pt) + ',' + opt_field(pt.ave_4pt) + '\n';
  emit("_curve.csv", c);

  for (int k : {1, 2}) {
    const auto g = grid(r, k);
    if (g.empty()) continue;
    std::string s = k == 1 ? "i,j,exact_abs,estimate_abs,abs_error\n" : "k,l,exact_abs,estimate_abs,abs_error\n";
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = 0; b < g.size(); ++b)
        s += std::to_string(a) + ',' + std::to_string(b) + ',' + format_double(std::abs(g[a][b]->exact)) + ',' +
             format_double(std::abs(g[a][b]->estimate.mean)) + ',' + format_double(g[a][b]->abs_error) + '\n';
    emit(k == 1 ? "_grid_2pt.csv" : "_grid_4pt.csv", s);
  }
  return files;
}

std::vector<std::filesystem::path> write_report_svg(const std::filesystem::path& dir, const RecoveryReport& r) {
  std::vector<std::filesystem::path> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(dir / name);
  };
  for (int k : {1, 2}) {
    const auto g = grid(r, k);
    if (g.empty()) continue;
    std::vector<std::vector<double>> ex(g.size()), est(g.size());
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = 0; b < g.size(); ++b) {
        ex[a].push_back(std::abs(g[a][b]->exact));
        est[a].push_back(std::abs(g[a][b]->estimate.mean));
      }
    const std::string what = k == 1 ? "|<a_i^dag a_j>|" : "|<a_0^dag a_1^dag a_k a_l>|";
    const std::string rl = k == 1 ? "i" : "k", cl = k == 1 ? "j" : "l";
    const std::string stem = k == 1 ? "grid_2pt" : "grid_4pt";
    emit(stem + "_exact.svg", svg::heat_map("exact " + what, ex, rl, cl));
    emit(stem + "_estimate.svg", svg::heat_map("estimated " + what, est, rl, cl));
  }
  std::vector<svg::Series> series;
  for (int k : {1, 2}) {
    svg::Series s{k == 1 ? "2-point" : "4-point", {}, {}};
    for (const auto& pt : r.curve) {
      const auto& v = k == 1 ? pt.ave_2pt : pt.ave_4pt;
      if (!v) continue;
      s.x.push_back(static_cast<double>(pt.N));
      s.y.push_back(*v);
    }
    if (!s.x.empty()) series.push_back(s);
  }
  emit("curve.svg", svg::line_plot({"average recovery error vs shots", "N", "Ave(dO)", true, true}, series));
  return files;
}

}  // namespace fshadow::cli
