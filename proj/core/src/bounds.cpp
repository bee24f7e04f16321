#include <cmath>

#include "fshadow/error.hpp"
#include "fshadow/estimator.hpp"

namespace fshadow::estimator {

namespace {

void check_eps_delta(double eps, double delta) {
  require(eps > 0.0 && eps < 1.0, "epsilon must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

std::int64_t ceil_count(double x) { return static_cast<std::int64_t>(std::ceil(x)); }

}  // namespace

double hoeffding_epsilon(double range_bound, std::int64_t N, double delta) {
  require(N >= 1, "Hoeffding epsilon needs N >= 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  // Re and Im each to eps/sqrt(2) at failure delta/2.
  return 2.0 * range_bound * std::sqrt(std::log(4.0 / delta) / static_cast<double>(N));
}

std::int64_t sample_bound_2pt(double eps, double delta, int L, BoundVariant variant) {
  check_eps_delta(eps, delta);
  require(L >= 2, "sample_bound_2pt needs L >= 2");
  const double pre = 16.0 / (eps * eps) * (L + 1.0) * (L + 1.0);
  const double count = variant == BoundVariant::main ? 4.0 * L * L : 2.0 * L * (L - 1.0);
  return ceil_count(pre * std::log(count / delta));
}

std::int64_t sample_bound_general(double eps, double delta, std::int64_t targets, double f_max) {
  check_eps_delta(eps, delta);
  require(targets >= 1, "sample_bound_general needs at least one target");
  require(f_max >= 0.0, "f_max must be non-negative");
  return ceil_count(4.0 / (eps * eps) * std::log(4.0 * static_cast<double>(targets) / delta) * f_max * f_max);
}

double f_norm(const EstimatorPlan& plan) { return plan.coefficients.cwiseAbs().sum(); }

double f_norm(const Eigen::VectorXcd& O, const channel::ChannelMatrix& Mplus) {
  require(static_cast<std::size_t>(O.size()) == Mplus.dimension(), "f_norm: dimension mismatch");
  return (Mplus.entries.cast<cplx>() * O).cwiseAbs().sum();
}

double bias_bound(double moment_deviation, int k, int L, double f_max) {
  require(moment_deviation >= 0.0 && f_max >= 0.0 && L >= 1, "bias_bound inputs must be non-negative");
  require(k == 1 || k == 2, "bias_bound supports k = 1 or 2");
  const double factorial = k == 1 ? 1.0 : 2.0;
  return moment_deviation * factorial * std::pow(static_cast<double>(L), 3 * k) * f_max;
}

}  // namespace fshadow::estimator
