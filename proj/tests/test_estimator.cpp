#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "fshadow/channel.hpp"
#include "fshadow/circulant.hpp"
#include "fshadow/error.hpp"
#include "fshadow/estimator.hpp"
#include "fshadow/fock.hpp"
#include "support.hpp"

using namespace fshadow;
using namespace fshadow::estimator;

namespace {

const channel::ChannelMatrix& m4(int L) {
  static const channel::ChannelMatrix m5 = channel::m4_matrix(5);
  static const channel::ChannelMatrix m7 = channel::m4_matrix(7);
  return L == 5 ? m5 : m7;
}

// <n| U A U^dag |n> through explicit statevector algebra.
cplx statevector_value(const circulant::ModeUnitary& u, const fock::OccupationOutcome& n,
                       const std::vector<int>& creation, const std::vector<int>& annihilation) {
  circulant::ModeUnitary inv;
  inv.entries = u.entries.adjoint();
  circulant::PhaseVector neg = *u.phases;
  for (auto& p : neg.phases) p = -p;
  inv.phases = neg;
  std::vector<int> occ(n.bits.begin(), n.bits.end());
  const auto psi = fock::apply_free_unitary(fock::fock_state(occ), inv);
  return fock::exact_correlator(psi, creation, annihilation);
}

bool within_band(const EstimateReport& r, cplx exact) {
  return std::abs(r.mean - exact) <= 4.0 * r.standard_error() + 1e-12;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("Wick evaluation matches statevector algebra") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> pick(0, 4);
  std::bernoulli_distribution bit(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = circulant::sample_haar_cusym(5, rng);
    fock::OccupationOutcome n;
    n.bits.resize(5);
    for (auto& b : n.bits) b = bit(rng);
    const auto G = occupied_gram(u, n);
    const int l = pick(rng), m = pick(rng);
    CHECK(std::abs(wick_value(G, {l}, {m}) - statevector_value(u, n, {l}, {m})) < 1e-10);
    const std::vector<int> c{pick(rng), pick(rng)}, a{pick(rng), pick(rng)};
    CHECK(std::abs(wick_value(G, c, a) - statevector_value(u, n, c, a)) < 1e-10);
  }
}

TEST_CASE("Kronecker collapse at u = I") {
  const auto id = circulant::unitary_from_phases(circulant::PhaseVector{std::vector<double>(5, 0.0)});
  const auto n = fock::OccupationOutcome::from_string("10100");
  const auto G = occupied_gram(id, n);
  for (int l = 0; l < 5; ++l)
    for (int m = 0; m < 5; ++m) CHECK(std::abs(wick_value(G, {l}, {m}) - (l == m ? 1.0 * n.bits[l] : 0.0)) < 1e-15);

  CHECK(std::abs(single_shot_eval(plan_2pt(0, 1, 4), id, n)) < 1e-15);
  const auto empty = fock::OccupationOutcome::from_string("00000");
  const auto u = circulant::unitary_from_phases(circulant::nn_phases(3.1, 5));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(single_shot_eval(plan_2pt(i, j, 4), u, empty)) < 1e-15);
}

TEST_CASE("2-point plans") {
  const int L = 4;
  const auto M = channel::m2_matrix(5);
  const auto Mp = channel::pseudo_inverse(M);
  const channel::CorrelatorBasis basis(1, 5);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const auto plan = plan_2pt(i, j, L);
      CHECK(plan.L_tot == 5);
      CHECK(plan.certificate_residual <= 1e-8);
      CHECK(certificate_residual(plan, M) <= 1e-8);
      Eigen::VectorXcd O = Eigen::VectorXcd::Zero(25);
      if (i != j) {
        O(static_cast<Eigen::Index>(basis.index({i}, {j}))) = 1.0;
        O(static_cast<Eigen::Index>(basis.index({4}, {((j - i - 1) % 5 + 5) % 5}))) = -1.0;
        CHECK((plan.coefficients - Mp.entries.cast<cplx>() * O).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(f_norm(plan) == doctest::Approx(2.0 * (L + 1)));
        CHECK(f_norm(O, Mp) == doctest::Approx(2.0 * (L + 1)));
      }
    }
  CHECK_THROWS_AS(plan_2pt(0, 1, 5), ValidationError);
  CHECK_THROWS_AS(plan_2pt(0, 4, 4), ValidationError);
  // wider ancilla blocks keep the same form
  CHECK(plan_2pt(0, 2, 5, 2).certificate_residual <= 1e-8);
}

TEST_CASE("ancilla term has zero expectation") {
  std::mt19937_64 rng(9);
  const auto psi = testing_support::random_state(4, rng);
  const auto big = fock::embed_with_ancillas(psi, 1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      const cplx O = fock::exact_correlator(big, {i}, {j}) - fock::exact_correlator(big, {4}, {((j - i - 1) % 5 + 5) % 5});
      CHECK(std::abs(O - fock::exact_correlator(psi, {i}, {j})) < 1e-12);
    }
}

TEST_CASE("2-point unbiasedness under Haar shots") {
  std::mt19937_64 rng(4);
  const auto psi = testing_support::random_sector_state(4, 2, rng);
  const auto big = fock::embed_with_ancillas(psi, 1);
  const auto shots = generate_shots(big, circulant::EnsembleSpec::haar(5), 20000, 1234);
  std::vector<EstimatorPlan> plans;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) plans.push_back(plan_2pt(i, j, 4));
  const auto values = evaluate_shots(plans, shots);
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const auto rep = aggregate_values(values[p], f_norm(plans[p]));
    const auto& t = plans[p].target;
    CHECK(within_band(rep, fock::exact_correlator(psi, t.creation, t.annihilation)));
    for (const auto& v : values[p]) {
      CHECK(std::abs(v.real()) <= f_norm(plans[p]) + 1e-9);
      CHECK(std::abs(v.imag()) <= f_norm(plans[p]) + 1e-9);
    }
  }
  const auto direct = aggregate(shots, plans[1]);
  CHECK(std::abs(direct.mean - aggregate_values(values[1], f_norm(plans[1])).mean) < 1e-12);
}

TEST_CASE("4-point plans") {
  const auto target = CorrelationTarget::four_point(0, 1, 0, 1);
  const auto plan = plan_4pt(target, 3, 2, m4(5));
  CHECK(plan.certificate_residual <= 1e-8);
  CHECK(certificate_residual(plan, m4(5)) <= 1e-8);

  const auto again = spectral_project(m4(5), plan.coefficients);
  CHECK((again - plan.coefficients).cwiseAbs().maxCoeff() <= 1e-10);

  Plan4Options ode;
  ode.projection = ProjectionBackend::ode;
  const auto flowed = plan_4pt(target, 3, 2, m4(5), ode);
  CHECK((flowed.coefficients - plan.coefficients).cwiseAbs().maxCoeff() <= 1e-6);

  Plan4Options cg;
  cg.solve = SolveBackend::cg;
  const auto viacg = plan_4pt(target, 3, 2, m4(5), cg);
  CHECK((viacg.coefficients - plan.coefficients).cwiseAbs().maxCoeff() <= 1e-8);

  const channel::M4Operator op(5);
  const auto mf = plan_4pt_matfree(target, 3, op);
  CHECK((mf.coefficients - plan.coefficients).cwiseAbs().maxCoeff() <= 1e-8);

  // reordered indices pick up the permutation sign, repeated ones vanish
  const auto swapped = plan_4pt(CorrelationTarget::four_point(1, 0, 0, 1), 3, 2, m4(5));
  CHECK((swapped.coefficients + plan.coefficients).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(plan_4pt(CorrelationTarget::four_point(1, 1, 0, 2), 3, 2, m4(5)).coefficients.norm() == 0.0);

  CHECK_THROWS_AS(plan_4pt(target, 6, 1, m4(7)), InfeasiblePlanError);
  CHECK_THROWS_AS(plan_4pt(target, 3, 1, m4(5)), ValidationError);
}

TEST_CASE("ancilla search") {
  auto provider = [](int L_tot) -> const channel::ChannelMatrix& { return m4(L_tot); };
  CHECK(find_ancillas(3, provider) == 2);
  CHECK(find_ancillas(4, provider) == 1);
  CHECK(find_ancillas(5, provider) == 2);
  CHECK_THROWS_AS(find_ancillas(6, provider, 1), InfeasiblePlanError);
}

TEST_CASE("4-point unbiasedness under Haar shots") {
  std::mt19937_64 rng(15);
  const auto psi = testing_support::random_sector_state(3, 2, rng);
  const auto big = fock::embed_with_ancillas(psi, 2);
  const auto shots = generate_shots(big, circulant::EnsembleSpec::haar(5), 20000, 77);
  std::vector<EstimatorPlan> plans;
  for (auto [i1, i2, j1, j2] : std::vector<std::array<int, 4>>{{0, 1, 0, 1}, {0, 2, 1, 2}, {1, 2, 0, 1}})
    plans.push_back(plan_4pt(CorrelationTarget::four_point(i1, i2, j1, j2), 3, 2, m4(5)));
  const auto values = evaluate_shots(plans, shots);
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const auto rep = aggregate_values(values[p], f_norm(plans[p]));
    const auto& t = plans[p].target;
    CHECK(within_band(rep, fock::exact_correlator(psi, t.creation, t.annihilation)));
    double worst = 0.0;
    for (const auto& v : values[p]) worst = std::max(worst, std::abs(v));
    CHECK(worst <= f_norm(plans[p]));
  }
}

TEST_CASE("aggregation") {
  const auto rep = aggregate_values(std::vector<cplx>(10, cplx(0.3, -0.2)), 1.0);
  CHECK(rep.variance == 0.0);
  CHECK(rep.count == 10);
  CHECK(std::abs(rep.mean - cplx(0.3, -0.2)) < 1e-15);
  CHECK(rep.hoeffding_epsilon == doctest::Approx(2.0 * std::sqrt(std::log(4.0 / 0.05) / 10.0)));

  const auto two = aggregate_values({cplx(1.0, 0.0), cplx(-1.0, 2.0)}, 1.0);
  CHECK(two.variance == doctest::Approx(2.0 + 2.0));
  CHECK_THROWS_AS(aggregate_values({}, 1.0), ValidationError);
  CHECK_THROWS_AS(aggregate({}, plan_2pt(0, 1, 4)), ValidationError);

  std::vector<cplx> many(1001);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = cplx(1.0 / (1.0 + i), 0.0);
  cplx naive = 0.0;
  for (const auto& v : many) naive += v;
  CHECK(std::abs(pairwise_sum(many.data(), many.size()) - naive) < 1e-12);
}

TEST_CASE("shot generation is deterministic across threads") {
  std::mt19937_64 rng(1);
  const auto big = fock::embed_with_ancillas(testing_support::random_state(4, rng), 1);
  const auto spec = circulant::EnsembleSpec::uniform(5, 120.0);
  const auto a = generate_shots(big, spec, 200, 42, 1);
  const auto b = generate_shots(big, spec, 200, 42, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].shot_id == static_cast<std::int64_t>(i));
    CHECK(*a[i].alpha == *b[i].alpha);
    CHECK((*a[i].alpha >= 0.0 && *a[i].alpha <= 120.0));
    CHECK(a[i].outcome.to_string() == b[i].outcome.to_string());
    CHECK(a[i].seed == shot_seed(42, static_cast<std::int64_t>(i)));
    CHECK(a[i].outcome.size() == 5);
  }
  CHECK_THROWS_AS(generate_shots(big, circulant::EnsembleSpec::uniform(7, 1.0), 1, 0), ValidationError);
}

TEST_CASE("sample bounds") {
  CHECK(sample_bound_2pt(0.1, 0.05, 4, BoundVariant::main) == 286185);
  const auto base = sample_bound_2pt(0.1, 0.05, 6, BoundVariant::main);
  const auto half = sample_bound_2pt(0.05, 0.05, 6, BoundVariant::main);
  CHECK(std::abs(static_cast<double>(half) - 4.0 * static_cast<double>(base)) <= 4.0);
  for (int L = 2; L <= 12; ++L)
    CHECK(sample_bound_2pt(0.1, 0.05, L, BoundVariant::appendix) < sample_bound_2pt(0.1, 0.05, L, BoundVariant::main));
  // general form with M = L(L-1)/2 targets and f = 2(L+1) reproduces the appendix bound
  CHECK(sample_bound_general(0.1, 0.05, 6, 10.0) == sample_bound_2pt(0.1, 0.05, 4, BoundVariant::appendix));
  CHECK_THROWS_AS(sample_bound_2pt(0.0, 0.05, 4), ValidationError);
  CHECK_THROWS_AS(sample_bound_2pt(0.1, 1.0, 4), ValidationError);
}

TEST_CASE("f-norm and bias bound") {
  const auto Mp = channel::pseudo_inverse(channel::m2_matrix(5));
  CHECK(f_norm(Eigen::VectorXcd::Zero(25), Mp) == 0.0);
  CHECK_THROWS_AS(f_norm(Eigen::VectorXcd::Zero(9), Mp), ValidationError);
  CHECK(bias_bound(0.0, 1, 5, 12.0) == 0.0);
  CHECK(bias_bound(1e-6, 1, 5, 24.0) == doctest::Approx(2.0 * bias_bound(1e-6, 1, 5, 12.0)));
  CHECK(bias_bound(1e-6, 2, 5, 1.0) == doctest::Approx(1e-6 * 2.0 * std::pow(5.0, 6)));
  CHECK_THROWS_AS(bias_bound(-1.0, 1, 5, 1.0), ValidationError);
}

TEST_CASE("plan serialization") {
  const auto dir = std::filesystem::temp_directory_path() / "fshadow_plan_test";
  std::filesystem::remove_all(dir);
  const auto plan = plan_4pt(CorrelationTarget::four_point(0, 2, 1, 2), 3, 2, m4(5));
  save_plan(dir / "p.fsc", plan);
  const auto back = load_plan(dir / "p.fsc");
  CHECK(back.L == 3);
  CHECK(back.L_tot == 5);
  CHECK(back.target.creation == plan.target.creation);
  CHECK(back.target.annihilation == plan.target.annihilation);
  CHECK((back.coefficients - plan.coefficients).norm() == 0.0);
  CHECK_THROWS_AS(channel::load_channel(dir / "p.fsc"), IoError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
