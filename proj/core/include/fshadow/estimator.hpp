#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fshadow/channel.hpp"
#include "fshadow/circulant.hpp"
#include "fshadow/fock.hpp"

namespace fshadow::estimator {

using cplx = std::complex<double>;

/// Tr(rho a^dag_{i1}..a^dag_{ik} a_{j1}..a_{jk}) on the physical modes.
struct CorrelationTarget {
  int k = 1;
  std::vector<int> creation;
  std::vector<int> annihilation;

  static CorrelationTarget two_point(int i, int j);
  static CorrelationTarget four_point(int i1, int i2, int j1, int j2);

  void validate(int L) const;
  std::string to_string() const;
};

/// Coefficients of M^+(O') in CorrelatorBasis(k, L_tot).
struct EstimatorPlan {
  int L = 0;
  int L_tot = 0;
  CorrelationTarget target;
  Eigen::VectorXcd coefficients;
  double certificate_residual = 0.0;

  int ancillas() const { return L_tot - L; }
};

/// One protocol repetition. Nearest-neighbour shots keep alpha; Haar shots
/// keep the sampled phase vector.
struct ShotRecord {
  std::int64_t shot_id = 0;
  std::optional<double> alpha;
  std::vector<double> phases;
  fock::OccupationOutcome outcome;
  std::uint64_t seed = 0;

  /// The mode unitary of this shot on L_tot modes.
  circulant::ModeUnitary unitary(int L_tot) const;
};

struct EstimateReport {
  cplx mean{0.0, 0.0};
  double variance = 0.0;  // Var(Re) + Var(Im), unbiased
  std::int64_t count = 0;
  double delta = 0.05;
  double hoeffding_epsilon = 0.0;

  double standard_error() const;
};

enum class SolveBackend { dense, cg };
enum class ProjectionBackend { spectral, ode };

struct Plan4Options {
  SolveBackend solve = SolveBackend::dense;
  ProjectionBackend projection = ProjectionBackend::spectral;
  double flow_time = 0.0;  // ODE flow horizon; 0 means 50 * L_tot
  double tolerance = 1e-8;
  int cg_max_iterations = 10000;
};

/// Max |(M c)_r - [r == target]| over the system-only rows r.
double certificate_residual(const EstimatorPlan& plan, const channel::ChannelMatrix& M);

/// Off-diagonal: L_tot (A_ij - A_{L_tot-1, j-i-1}). Diagonal: M2^+ applied to A_ii.
EstimatorPlan plan_2pt(int i, int j, int L, int L_anc = 1);

/// Minimum-norm solution of the system-row equations, then projected onto the
/// image of M^(4). Throws InfeasiblePlanError when the rows are rank-deficient.
EstimatorPlan plan_4pt(const CorrelationTarget& target, int L, int L_anc, const channel::ChannelMatrix& M4,
                       const Plan4Options& opts = {});

/// Matrix-free variant: CG on the normal equations through M4Operator.
EstimatorPlan plan_4pt_matfree(const CorrelationTarget& target, int L, const channel::M4Operator& M4,
                               double tolerance = 1e-8, int max_iterations = 10000);

/// Smallest singular value of the system rows, scaled by the largest.
double system_conditioning(int L, const channel::ChannelMatrix& M4);

/// Smallest L_anc (same parity steps, L_tot odd) for which 4-point plans exist.
int find_ancillas(int L, const std::function<const channel::ChannelMatrix&(int)>& m4_for, int max_ancillas = 6);

/// Projection of coefficients onto the image of M via Euler steps of dX/dt = M (X0 - X).
Eigen::VectorXcd ode_project(const channel::ChannelMatrix& M, const Eigen::VectorXcd& x0, double flow_time);
Eigen::VectorXcd spectral_project(const channel::ChannelMatrix& M, const Eigen::VectorXcd& x0,
                                  double tol = channel::kDefaultPinvTol);

/// G_lm = sum_{p occupied} ubar_lp u_mp.
Eigen::MatrixXcd occupied_gram(const circulant::ModeUnitary& u, const fock::OccupationOutcome& n);

/// <n|U A U^dag|n> for basis correlators through G.
cplx wick_value(const Eigen::MatrixXcd& G, const std::vector<int>& creation, const std::vector<int>& annihilation);

cplx evaluate(const EstimatorPlan& plan, const Eigen::MatrixXcd& G);
cplx single_shot_eval(const EstimatorPlan& plan, const circulant::ModeUnitary& u, const fock::OccupationOutcome& n);

/// Fixed-order pairwise summation.
cplx pairwise_sum(const cplx* values, std::size_t n);

EstimateReport aggregate_values(const std::vector<cplx>& values, double range_bound, double delta = 0.05);
EstimateReport aggregate(const std::vector<ShotRecord>& shots, const EstimatorPlan& plan, double delta = 0.05);

double hoeffding_epsilon(double range_bound, std::int64_t N, double delta);

enum class BoundVariant { main, appendix };

std::int64_t sample_bound_2pt(double eps, double delta, int L, BoundVariant variant = BoundVariant::appendix);
std::int64_t sample_bound_general(double eps, double delta, std::int64_t targets, double f_max);

/// ||c||_1, the range bound of single-shot values.
double f_norm(const EstimatorPlan& plan);
/// sum_s |sum_l M^+_{s,l} O_l|.
double f_norm(const Eigen::VectorXcd& O, const channel::ChannelMatrix& Mplus);

double bias_bound(double moment_deviation, int k, int L, double f_max);

/// splitmix64(base ^ shot_id), the per-shot generator seed.
std::uint64_t shot_seed(std::uint64_t base, std::int64_t shot_id);

/// Protocol shots on a fixed input state (already embedded with ancillas).
/// Each shot reseeds from shot_seed, so output does not depend on `threads`.
std::vector<ShotRecord> generate_shots(const fock::StateVector& input, const circulant::EnsembleSpec& spec,
                                       std::int64_t count, std::uint64_t seed, int threads = 1,
                                       std::int64_t first_id = 0);

/// Single-shot values for every plan, indexed [plan][shot]. Plans must share L_tot.
std::vector<std::vector<cplx>> evaluate_shots(const std::vector<EstimatorPlan>& plans,
                                              const std::vector<ShotRecord>& shots, int threads = 1);

void save_plan(const std::filesystem::path& path, const EstimatorPlan& plan);
EstimatorPlan load_plan(const std::filesystem::path& path);

}  // namespace fshadow::estimator
