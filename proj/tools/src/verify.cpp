#include <cmath>
#include <cstdio>

#include "fshadow/channel.hpp"
#include "fshadow/circulant.hpp"
#include "fshadow/cli/commands.hpp"
#include "fshadow/commutant.hpp"
#include "fshadow/error.hpp"

namespace fshadow::cli {

namespace {

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string tag(const std::string& name, int L) { return name + " L=" + std::to_string(L); }

void channel_suite(int L, const VerifyOptions& opts, std::vector<SuiteCheck>& out) {
  require(L >= 3 && L % 2 == 1, "channel suite needs odd L >= 3");
  const auto M = channel::m2_matrix(L);

  double kernel = 0.0;
  for (const auto& v : channel::kernel_basis_2pt(L)) kernel = std::max(kernel, (M.entries * v).cwiseAbs().maxCoeff());
  out.push_back({tag("m2 kernel", L), kernel <= 1e-10, fmt("max residual %.2e", kernel)});

  const auto image = channel::image_basis_2pt(L);
  double eig = 0.0;
  for (int r = 0; r < (L - 1) * (L - 1); ++r)
    eig = std::max(eig, (M.entries * image[static_cast<std::size_t>(r)] - image[static_cast<std::size_t>(r)] / L)
                            .cwiseAbs()
                            .maxCoeff());
  out.push_back({tag("m2 eigenvalue 1/L on off-diagonal image", L), eig <= 1e-10, fmt("max residual %.2e", eig)});

  const auto rank = M.rank();
  out.push_back({tag("m2 rank", L), rank == L * L - L + 1, "rank " + std::to_string(rank)});

  const long dim = channel::commutant_dimension(2, L);
  const long closed = 8L * L * L - 16L * L + 9;
  out.push_back({tag("commutant dimension", L), dim == closed,
                 std::to_string(dim) + " vs 8L^2-16L+9 = " + std::to_string(closed)});

  const auto M4 = obtain_channel(2, L, opts.cache_dir, true, opts.threads);
  const auto& ev = M4.spectrum().values;
  const double asym = (M4.entries - M4.entries.transpose()).cwiseAbs().maxCoeff();
  const bool psd = ev.minCoeff() >= -1e-9 && ev.maxCoeff() <= 1.0 + 1e-9 && asym <= 1e-12;
  out.push_back({tag("m4 symmetric with spectrum in [0, 1]", L), psd,
                 fmt("min %.3e", ev.minCoeff()) + fmt(", max %.6f", ev.maxCoeff())});

  if (L <= 5) {
    const auto oracle = channel::m4_matrix_oracle(L);
    const double diff = (M4.entries - oracle.entries).cwiseAbs().maxCoeff();
    out.push_back({tag("m4 equals commutant oracle", L), diff <= 1e-10, fmt("max |diff| %.2e", diff)});
  }
}

void estimator_suite(int L, const VerifyOptions& opts, std::vector<SuiteCheck>& out) {
  require(L >= 3 && L <= 5, "estimator suite supports 3 <= L <= 5");
  ExperimentConfig cfg;
  cfg.L = L;
  cfg.L_anc = default_ancillas(L);
  cfg.ensemble = circulant::EnsembleSpec::haar(cfg.L_tot());
  cfg.N = opts.shots;
  cfg.seed = opts.seed;
  cfg.threads = opts.threads;
  cfg.state.field_seed = opts.seed + 17;
  cfg.targets = expand_targets(json::array({"all_2pt"}), L);
  // 4-point sample: canonical index pairs, at most six.
  int added = 0;
  for (int i1 = 0; i1 < L && added < 6; ++i1)
    for (int i2 = i1 + 1; i2 < L && added < 6; ++i2)
      for (int j1 = 0; j1 < L && added < 6; ++j1)
        for (int j2 = j1 + 1; j2 < L && added < 6; ++j2, ++added)
          cfg.targets.push_back(estimator::CorrelationTarget::four_point(i1, i2, j1, j2));

  EstimateOptions eo;
  eo.cache_dir = opts.cache_dir;
  eo.build_missing = true;
  eo.threads = opts.threads;
  const auto report = estimate_report(cfg, run_protocol(cfg), eo);

  for (int k : {1, 2}) {
    int total = 0, inside = 0;
    double worst = 0.0;
    for (const auto& row : report.rows) {
      if (row.target.k != k) continue;
      ++total;
      if (row.abs_error <= 4.0 * row.estimate.standard_error() + 1e-12) ++inside;
      if (row.estimate.standard_error() > 0) worst = std::max(worst, row.abs_error / row.estimate.standard_error());
    }
    if (total == 0) continue;
    const std::string what = k == 1 ? "2-point" : "4-point";
    out.push_back({tag(what + " unbiased within 4 standard errors (L_tot=" + std::to_string(cfg.L_tot()) + ")", L),
                   inside == total,
                   std::to_string(inside) + "/" + std::to_string(total) + " inside, worst " + fmt("%.2f sigma", worst)});
  }
}

void design_suite(int L, const VerifyOptions&, std::vector<SuiteCheck>& out) {
  require(L >= 3 && L % 2 == 1 && L <= 9, "design suite needs odd 3 <= L <= 9");
  const double k_nested = circulant::kappa(2, L), k_sorted = circulant::kappa_sorted(2, L);
  out.push_back({tag("kappa2 codings agree", L), std::abs(k_nested - k_sorted) <= 1e-12 * std::max(1.0, k_nested),
                 fmt("kappa2 = %.6g", k_nested)});
  for (double amax : {20.0, 70.0, 120.0}) {
    const auto spec = circulant::EnsembleSpec::uniform(L, amax);
    const double bound = circulant::design_error_bound(spec, 2);
    const double dev = circulant::empirical_moment_deviation(spec, 2, static_cast<int>(10 * amax * L));
    out.push_back({tag("moment deviation within 2/(alpha_max kappa2), alpha_max=" + fmt("%g", amax), L), dev <= bound,
                   fmt("deviation %.3e", dev) + fmt(" <= bound %.3e", bound)});
  }
}

}  // namespace

std::vector<SuiteCheck> run_suite(const VerifyOptions& opts) {
  std::vector<SuiteCheck> out;
  std::vector<int> Ls = opts.Ls;
  if (opts.suite == "channel") {
    if (Ls.empty()) Ls = {3, 5};
    for (int L : Ls) channel_suite(L, opts, out);
  } else if (opts.suite == "estimator") {
    if (Ls.empty()) Ls = {4, 3};
    for (int L : Ls) estimator_suite(L, opts, out);
  } else if (opts.suite == "design") {
    if (Ls.empty()) Ls = {5};
    for (int L : Ls) design_suite(L, opts, out);
  } else {
    throw ValidationError("unknown suite '" + opts.suite + "' (expected channel, estimator or design)");
  }
  return out;
}

}  // namespace fshadow::cli
