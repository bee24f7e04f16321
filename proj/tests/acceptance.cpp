// Acceptance run: one PASS/FAIL line per criterion. `fshadow_acceptance N` runs
// criterion N only; without arguments all nine run. Exit status is nonzero when
// any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fshadow/channel.hpp"
#include "fshadow/circulant.hpp"
#include "fshadow/cli/commands.hpp"
#include "fshadow/cli/shot_log.hpp"
#include "fshadow/commutant.hpp"
#include "fshadow/estimator.hpp"
#include "fshadow/fock.hpp"

using namespace fshadow;
namespace fs = std::filesystem;
using estimator::cplx;

namespace {

// Pinned tolerances.
constexpr double kSigmaBand = 4.0;
constexpr double kOracleTol = 1e-10;
constexpr double kSpectralTol = 1e-10;
constexpr double kRecoveryTol20k = 1e-2;
constexpr double kRecoveryTol70k = 5e-3;
constexpr double kInsufficientFloor = 1e-2;
constexpr std::int64_t kHandBound = 286185;  // ceil(40000 ln 1280)
constexpr double kShotSlack = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("fshadow_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Hubbard evolution of a Fock configuration under a random field in [0.2, 0.7].
fock::StateVector hubbard_evolved(const std::vector<int>& occupation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> g(0.2, 0.7);
  std::vector<double> field(occupation.size());
  for (auto& v : field) v = g(rng);
  return fock::evolve(fock::fock_state(occupation), fock::hubbard_hamiltonian(static_cast<int>(occupation.size()), field),
                      1.5);
}

Outcome channel_vs_monte_carlo() {
  constexpr int kSamples = 1000000;
  int worst_L = 0;
  double worst_z = 0.0;
  bool ok = true;
  for (int L : {3, 5}) {
    std::mt19937_64 rng(1000 + L);
    // The channel is translation invariant, so the entries with i = 0 cover every value.
    const int cells = L * L * L;
    std::vector<double> sum(cells, 0.0), sq(cells, 0.0);
    std::vector<cplx> w(static_cast<std::size_t>(L * L)), v(static_cast<std::size_t>(L * L));
    for (int n = 0; n < kSamples; ++n) {
      const auto u = circulant::unitary_from_phases(circulant::sample_haar_phases(L, rng)).entries;
      for (int a = 0; a < L; ++a)
        for (int p = 0; p < L; ++p) {
          w[static_cast<std::size_t>(a * L + p)] = std::conj(u(0, p) * u(a, p));  // ubar_0p ubar_mp
          v[static_cast<std::size_t>(a * L + p)] = u(a, p);
        }
      for (int j = 0; j < L; ++j)
        for (int l = 0; l < L; ++l)
          for (int m = 0; m < L; ++m) {
            double acc = 0.0;
            for (int p = 0; p < L; ++p)
              acc += (w[static_cast<std::size_t>(m * L + p)] * v[static_cast<std::size_t>(j * L + p)] *
                      v[static_cast<std::size_t>(l * L + p)])
                         .real();
            const int c = (j * L + l) * L + m;
            sum[c] += acc;
            sq[c] += acc * acc;
          }
    }
    for (int j = 0; j < L; ++j)
      for (int l = 0; l < L; ++l)
        for (int m = 0; m < L; ++m) {
          const int c = (j * L + l) * L + m;
          const double mean = sum[c] / kSamples;
          const double se = std::sqrt(std::max(sq[c] / kSamples - mean * mean, 0.0) / kSamples);
          const double diff = std::abs(mean - channel::m2_entry(0, j, l, m, L));
          if (diff > kSigmaBand * se + 1e-12) ok = false;
          if (se > 0 && diff / se > worst_z) worst_z = diff / se, worst_L = L;
        }
  }
  return {ok, "L in {3,5}, 1e6 Haar samples, worst deviation " + fmt("%.2f sigma", worst_z) + " (L=" +
                  std::to_string(worst_L) + ")"};
}

Outcome m4_oracle_gate() {
  const auto fast = channel::m4_matrix(5);
  const auto oracle = channel::m4_matrix_oracle(5);
  const double diff = (fast.entries - oracle.entries).cwiseAbs().maxCoeff();
  return {diff <= kOracleTol, "L_tot=5, d=" + std::to_string(fast.dimension()) + ", max |diff| " + fmt("%.2e", diff)};
}

Outcome spectral_structure() {
  bool ok = true;
  double kernel = 0.0, eig = 0.0;
  std::string dims;
  for (int L : {3, 5, 7, 9, 11}) {
    const auto M = channel::m2_matrix(L);
    for (const auto& v : channel::kernel_basis_2pt(L)) kernel = std::max(kernel, (M.entries * v).cwiseAbs().maxCoeff());
    const auto image = channel::image_basis_2pt(L);
    for (int r = 0; r < (L - 1) * (L - 1); ++r) {
      const auto& x = image[static_cast<std::size_t>(r)];
      eig = std::max(eig, (M.entries * x - x / L).cwiseAbs().maxCoeff());
    }
    const long dim = channel::commutant_dimension(2, L);
    const long closed = 8L * L * L - 16L * L + 9;
    if (dim != closed) ok = false;
    dims += (dims.empty() ? "" : ",") + std::to_string(dim);
  }
  ok = ok && kernel <= kSpectralTol && eig <= kSpectralTol;
  return {ok, "kernel residual " + fmt("%.1e", kernel) + ", 1/L eigen residual " + fmt("%.1e", eig) +
                  ", commutant dims {" + dims + "} for L in {3,5,7,9,11}"};
}

Outcome unbiasedness() {
  constexpr std::int64_t kShots = 100000;
  int inside = 0, total = 0;
  double worst = 0.0;
  auto band = [&](const std::vector<estimator::EstimatorPlan>& plans, const fock::StateVector& psi,
                  const std::vector<estimator::ShotRecord>& shots) {
    const auto values = estimator::evaluate_shots(plans, shots);
    for (std::size_t p = 0; p < plans.size(); ++p) {
      const auto rep = estimator::aggregate_values(values[p], estimator::f_norm(plans[p]));
      const auto& t = plans[p].target;
      const double err = std::abs(rep.mean - fock::exact_correlator(psi, t.creation, t.annihilation));
      ++total;
      if (err <= kSigmaBand * rep.standard_error() + 1e-12) ++inside;
      if (rep.standard_error() > 0) worst = std::max(worst, err / rep.standard_error());
    }
  };

  // 2-point: L = 4, L_tot = 5, CDW |0101> evolved under a random-field Hubbard chain.
  const auto psi4 = hubbard_evolved({0, 1, 0, 1}, 41);
  const auto shots4 = estimator::generate_shots(fock::embed_with_ancillas(psi4, 1), circulant::EnsembleSpec::haar(5),
                                                kShots, 4004);
  std::vector<estimator::EstimatorPlan> p2;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) p2.push_back(estimator::plan_2pt(i, j, 4, 1));
  band(p2, psi4, shots4);
  const int two_point = total;

  // 4-point: L = 3, L_tot = 5. Two particles, so the 4-point sector is not trivially zero.
  const auto psi3 = hubbard_evolved({1, 1, 0}, 31);
  const auto shots3 = estimator::generate_shots(fock::embed_with_ancillas(psi3, 2), circulant::EnsembleSpec::haar(5),
                                                kShots, 3003);
  const auto M4 = channel::m4_matrix(5);
  std::vector<estimator::EstimatorPlan> p4;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}})
    for (auto [c, d] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}})
      p4.push_back(estimator::plan_4pt(estimator::CorrelationTarget::four_point(a, b, c, d), 3, 2, M4));
  band(p4, psi3, shots3);

  return {inside == total, std::to_string(inside) + "/" + std::to_string(total) + " inside 4 sigma (" +
                               std::to_string(two_point) + " 2-point at L=4, " + std::to_string(total - two_point) +
                               " 4-point at L=3), worst " + fmt("%.2f sigma", worst)};
}

cli::ExperimentConfig recovery_config(double alpha_max, std::int64_t N, std::uint64_t seed) {
  cli::ExperimentConfig cfg;
  cfg.L = 5;
  cfg.L_anc = 2;
  cfg.ensemble = circulant::EnsembleSpec::uniform(7, alpha_max);
  cfg.N = N;
  cfg.seed = seed;
  cfg.targets = cli::expand_targets(cli::json::array({"all_2pt"}), 5);
  return cfg;
}

double recovery_error(double alpha_max, std::int64_t N, std::uint64_t seed) {
  const auto cfg = recovery_config(alpha_max, N, seed);
  cli::EstimateOptions eo;
  return *cli::estimate_report(cfg, cli::run_protocol(cfg), eo).ave_2pt;
}

Outcome nn_recovery() {
  const double e20 = recovery_error(120.0, 20000, 1);
  const double e70 = recovery_error(120.0, 70000, 2);
  const bool ok = e20 <= kRecoveryTol20k && e70 <= kRecoveryTol70k;
  return {ok, "L=5, L_tot=7, alpha_max=120: Ave(dO)=" + fmt("%.4f", e20) + " at N=20000 (need <= 1e-2), " +
                  fmt("%.4f", e70) + " at N=70000 (need <= 5e-3)"};
}

Outcome insufficient_alpha() {
  const double e = recovery_error(20.0, 20000, 1);
  return {e > kInsufficientFloor, "L=5, L_tot=7, alpha_max=20, N=20000: Ave(dO)=" + fmt("%.4f", e) + " (need > 1e-2)"};
}

Outcome design_bound() {
  bool ok = true;
  std::string detail = "L=5, kappa2=" + fmt("%.6f", circulant::kappa(2, 5));
  for (double amax : {20.0, 120.0}) {
    const auto spec = circulant::EnsembleSpec::uniform(5, amax);
    const double bound = 2.0 / (amax * circulant::kappa(2, 5));
    const double dev = circulant::empirical_moment_deviation(spec, 2, static_cast<int>(10 * amax * 5));
    ok = ok && dev <= bound;
    detail += "; alpha_max=" + fmt("%g", amax) + ": " + fmt("%.3e", dev) + " <= " + fmt("%.3e", bound);
  }
  return {ok, detail};
}

Outcome bound_calculators() {
  const auto main_bound = estimator::sample_bound_2pt(0.1, 0.05, 4, estimator::BoundVariant::main);
  const auto appendix_bound = estimator::sample_bound_2pt(0.1, 0.05, 4, estimator::BoundVariant::appendix);
  const auto appendix_hand =
      static_cast<std::int64_t>(std::ceil(16.0 * 25.0 / 0.01 * std::log(2.0 * 4.0 * 3.0 / 0.05)));
  bool ok = main_bound == kHandBound && appendix_bound == appendix_hand;

  // 1e5 nearest-neighbour shots at L = 4, L_tot = 5 (one ancilla, so 2(L+1) is the 2-point range).
  const int L = 4;
  const auto psi = hubbard_evolved({0, 1, 0, 1}, 8);
  const auto shots = estimator::generate_shots(fock::embed_with_ancillas(psi, 1),
                                               circulant::EnsembleSpec::uniform(5, 120.0), 100000, 808);
  std::vector<estimator::EstimatorPlan> plans;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) plans.push_back(estimator::plan_2pt(i, j, L, 1));
  const auto M4 = channel::m4_matrix(5);
  for (auto [c, d] : std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {2, 3}})
    plans.push_back(estimator::plan_4pt(estimator::CorrelationTarget::four_point(0, 1, c, d), L, 1, M4));
  const auto values = estimator::evaluate_shots(plans, shots);
  double ratio = 0.0, two_point_max = 0.0;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const double f = estimator::f_norm(plans[p]);
    for (const auto& v : values[p]) {
      ratio = std::max(ratio, std::abs(v) / f);
      if (plans[p].target.k == 1) two_point_max = std::max(two_point_max, std::abs(v));
    }
    if (plans[p].target.k == 1 && f > 2.0 * (L + 1) + kShotSlack) ok = false;
  }
  ok = ok && ratio <= 1.0 + kShotSlack && two_point_max <= 2.0 * (L + 1) + kShotSlack;
  return {ok, "sample_bound_2pt(0.1, 0.05, 4): main " + std::to_string(main_bound) + ", appendix " +
                  std::to_string(appendix_bound) + "; max |X|/f_norm " + fmt("%.3f", ratio) +
                  " over 1e5 shots; max 2-point |X| " + fmt("%.3f", two_point_max) + " <= 2(L+1) = 10"};
}

Outcome reproducibility() {
  const auto dir = scratch("repro");
  auto cfg = cli::ExperimentConfig::from_json(cli::json::parse(R"({
    "L": 5, "L_anc": 2, "ensemble": {"kind": "nn_uniform", "alpha_max": 120},
    "N": 3000, "seed": 99, "targets": ["all_2pt", "row01_4pt"]})"));
  cli::EstimateOptions eo;
  eo.cache_dir = dir / "cache";
  eo.build_missing = true;

  std::vector<std::string> logs, reports, csvs;
  for (int threads : {1, 1, 4}) {
    const auto tag = std::to_string(logs.size());
    cfg.threads = threads;
    cfg.output.shots = dir / ("shots" + tag + ".csv");
    cfg.output.report = dir / ("report" + tag + ".json");
    cfg.output.csv_prefix = dir / ("report" + tag);
    cli::run_to_log(cfg, {});
    eo.threads = threads;
    cli::estimate_from_log(cfg, cfg.output.shots, eo);
    logs.push_back(slurp(cfg.output.shots));
    reports.push_back(slurp(cfg.output.report));
    csvs.push_back(slurp(dir / ("report" + tag + "_targets.csv")));
  }
  const bool ok = !logs[0].empty() && logs[0] == logs[1] && logs[0] == logs[2] && reports[0] == reports[1] &&
                  reports[0] == reports[2] && csvs[0] == csvs[1] && csvs[0] == csvs[2];
  fs::remove_all(dir);
  return {ok, "3 runs (1, 1 and 4 lanes), N=3000, 50 targets: shot logs, JSON reports and CSVs " +
                  std::string(ok ? "byte-identical" : "differ")};
}

struct Criterion {
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"channel closed form vs Monte Carlo", channel_vs_monte_carlo},
      {"M4 deterministic oracle gate", m4_oracle_gate},
      {"spectral structure", spectral_structure},
      {"unbiasedness under Haar shots", unbiasedness},
      {"nearest-neighbour recovery", nn_recovery},
      {"insufficient alpha_max regression", insufficient_alpha},
      {"design bound", design_bound},
      {"bound calculators", bound_calculators},
      {"reproducibility", reproducibility},
  };
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
  if (selected.empty())
    for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) selected.push_back(c);

  int failed = 0;
  for (int c : selected) {
    if (c < 1 || c > static_cast<int>(criteria.size())) {
      std::printf("criterion %d: unknown\n", c);
      ++failed;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[static_cast<std::size_t>(c - 1)].run();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s. %s (%.1f s)\n", c, out.pass ? "PASS" : "FAIL",
                criteria[static_cast<std::size_t>(c - 1)].title, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed ? 1 : 0;
}
