#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "fshadow/circulant.hpp"
#include "fshadow/error.hpp"
#include "fshadow/fock.hpp"
#include "support.hpp"

using namespace fshadow;
using namespace fshadow::fock;
using testing_support::random_state;

TEST_SUITE("fock") {

TEST_CASE("ladder signs follow mode ordering") {
  // a1 |1,1> = -|1,0>
  const auto s = apply_ladder(fock_state({1, 1}), 1, Ladder::annihilation);
  CHECK(std::abs(s.amplitudes(0b01) + 1.0) < 1e-15);
  CHECK(s.amplitudes.norm() == doctest::Approx(1.0));

  const auto occ = fock_state({0, 1, 0});
  const auto back = apply_ladder(apply_ladder(occ, 1, Ladder::annihilation), 1, Ladder::creation);
  CHECK((back.amplitudes - occ.amplitudes).norm() < 1e-15);

  CHECK_THROWS_AS(apply_ladder(occ, 3, Ladder::creation), ValidationError);
}

TEST_CASE("canonical anticommutation relations on random states") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, 5);
  const auto psi = random_state(6, rng);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = pick(rng), l = pick(rng);
    const auto ab = apply_ladder(apply_ladder(psi, l, Ladder::creation), k, Ladder::annihilation);
    const auto ba = apply_ladder(apply_ladder(psi, k, Ladder::annihilation), l, Ladder::creation);
    const Eigen::VectorXcd anti = ab.amplitudes + ba.amplitudes;
    const Eigen::VectorXcd want = (k == l ? 1.0 : 0.0) * psi.amplitudes;
    CHECK((anti - want).norm() < 1e-12);

    const auto cc1 = apply_ladder(apply_ladder(psi, l, Ladder::creation), k, Ladder::creation);
    const auto cc2 = apply_ladder(apply_ladder(psi, k, Ladder::creation), l, Ladder::creation);
    CHECK((cc1.amplitudes + cc2.amplitudes).norm() < 1e-12);
  }
}

TEST_CASE("Hubbard Hamiltonian on two sites") {
  const auto H = hubbard_hamiltonian(2, {0.0, 0.0});
  // basis order |00>, |10>, |01>, |11> with bit 0 = mode 0
  CHECK(std::abs(H.matrix(0b01, 0b10)) == doctest::Approx(1.0));
  CHECK(std::abs(H.matrix(0b10, 0b01)) == doctest::Approx(1.0));
  CHECK(H.matrix(0b11, 0b11).real() == doctest::Approx(1.0));
  CHECK(std::abs(H.matrix(0, 0)) < 1e-15);
  CHECK(std::abs(H.matrix(0b01, 0b01)) < 1e-15);
  CHECK_THROWS_AS(hubbard_hamiltonian(3, {0.1, 0.2}), ValidationError);
}

TEST_CASE("Hubbard Hamiltonian conserves particle number") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> g(0.2, 0.7);
  std::vector<double> field(5);
  for (auto& v : field) v = g(rng);
  const auto H = hubbard_hamiltonian(5, field);
  const auto N = number_operator(5);
  CHECK(H.hermitian);
  CHECK((H.matrix - H.matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((H.matrix * N.matrix - N.matrix * H.matrix).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("evolution is unitary and number conserving") {
  std::mt19937_64 rng(3);
  const auto H = hubbard_hamiltonian(5, {0.3, 0.5, 0.2, 0.7, 0.4});
  const auto psi = random_state(5, rng);
  const auto same = evolve(psi, H, 0.0);
  CHECK((same.amplitudes - psi.amplitudes).norm() < 1e-12);

  const auto fwd = evolve(psi, H, 1.5);
  CHECK(std::abs(fwd.norm() - 1.0) <= 1e-10);
  const auto back = evolve(fwd, H, -1.5);
  CHECK((back.amplitudes - psi.amplitudes).norm() < 1e-9);

  const auto cdw = evolve(cdw_state(5), H, 1.5);
  double n = 0.0;
  for (int i = 0; i < 5; ++i) n += exact_correlator(cdw, {i}, {i}).real();
  CHECK(n == doctest::Approx(2.0).epsilon(1e-12));

  ManyBodyOperator bad = H;
  bad.matrix(0, 1) += 1.0;
  bad.hermitian = false;
  CHECK_THROWS_AS(evolve(psi, bad, 1.0), ValidationError);
}

TEST_CASE("evolution agrees with a dense exponential") {
  std::mt19937_64 rng(8);
  const auto H = hubbard_hamiltonian(4, {0.25, 0.6, 0.3, 0.45});
  const auto psi = random_state(4, rng);
  const Eigen::MatrixXcd U = (cplx(0.0, -0.7) * H.matrix).exp();
  CHECK((evolve(psi, H, 0.7).amplitudes - U * psi.amplitudes).norm() < 1e-10);
}

TEST_CASE("free unitary: identity, single particle contract, number conservation") {
  std::mt19937_64 rng(21);
  const auto psi = random_state(5, rng);
  const auto id = circulant::unitary_from_phases(circulant::PhaseVector{std::vector<double>(5, 0.0)});
  CHECK((apply_free_unitary(psi, id).amplitudes - psi.amplitudes).norm() < 1e-12);

  const auto u = circulant::sample_haar_cusym(5, rng);
  // U a_i^dag |0> = sum_j conj(u_ij) a_j^dag |0>
  for (int i = 0; i < 5; ++i) {
    const auto out = apply_free_unitary(apply_ladder(vacuum(5), i, Ladder::creation), u);
    for (int j = 0; j < 5; ++j)
      CHECK(std::abs(out.amplitudes(Eigen::Index{1} << j) - std::conj(u.entries(i, j))) < 1e-9);
  }

  const auto phi = apply_free_unitary(psi, u);
  CHECK(std::abs(phi.norm() - 1.0) <= 1e-10);
  const auto N = number_operator(5);
  const cplx n0 = psi.amplitudes.dot(N.matrix * psi.amplitudes);
  const cplx n1 = phi.amplitudes.dot(N.matrix * phi.amplitudes);
  CHECK(std::abs(n0 - n1) < 1e-10);
}

TEST_CASE("free unitary: Heisenberg action on ladder operators") {
  std::mt19937_64 rng(4);
  const auto u = circulant::sample_haar_cusym(4 + 1, rng);
  const auto psi = random_state(5, rng);
  // U a_i U^dag psi = sum_j u_ij a_j psi
  auto Ud = [&](const StateVector& s) {
    circulant::ModeUnitary inv;
    inv.entries = u.entries.adjoint();
    circulant::PhaseVector neg = *u.phases;
    for (auto& p : neg.phases) p = -p;
    inv.phases = neg;
    return apply_free_unitary(s, inv);
  };
  for (int i = 0; i < 5; ++i) {
    const auto lhs = apply_free_unitary(apply_ladder(Ud(psi), i, Ladder::annihilation), u);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(lhs.amplitudes.size());
    for (int j = 0; j < 5; ++j) rhs += u.entries(i, j) * apply_ladder(psi, j, Ladder::annihilation).amplitudes;
    CHECK((lhs.amplitudes - rhs).norm() < 1e-9);
  }
}

TEST_CASE("free unitary: composition of circulants") {
  std::mt19937_64 rng(17);
  const auto psi = random_state(5, rng);
  const auto u1 = circulant::sample_haar_cusym(5, rng);
  const auto u2 = circulant::sample_haar_cusym(5, rng);
  circulant::PhaseVector sum = *u1.phases;
  for (std::size_t k = 0; k < sum.phases.size(); ++k) sum.phases[k] += u2.phases->phases[k];
  const auto u12 = circulant::unitary_from_phases(sum);
  CHECK((u12.entries - u1.entries * u2.entries).cwiseAbs().maxCoeff() < 1e-12);

  const auto a = apply_free_unitary(psi, u12);
  const auto b = apply_free_unitary(apply_free_unitary(psi, u2), u1);
  const cplx overlap = a.amplitudes.dot(b.amplitudes);
  CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-9);

  // generic route (no phase provenance) agrees with the Fourier route
  circulant::ModeUnitary plain;
  plain.entries = u1.entries;
  CHECK((apply_free_unitary(psi, plain).amplitudes - apply_free_unitary(psi, u1).amplitudes).norm() < 1e-9);
}

TEST_CASE("occupation sampling") {
  std::mt19937_64 rng(1);
  const auto fixed = fock_state({0, 1, 0});
  for (int i = 0; i < 20; ++i) CHECK(sample_occupation(fixed, rng).to_string() == "010");

  StateVector sup;
  sup.modes = 2;
  sup.amplitudes = Eigen::VectorXcd::Zero(4);
  sup.amplitudes(0b01) = sup.amplitudes(0b10) = 1.0 / std::sqrt(2.0);
  const int n = 10000;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    const auto o = sample_occupation(sup, rng);
    CHECK(o.particle_number() == 1);
    first += o.bits[0];
  }
  CHECK(std::abs(first - n / 2) <= 3.0 * std::sqrt(n * 0.25));

  std::mt19937_64 r1(99), r2(99);
  const auto psi = random_state(4, r1);
  std::mt19937_64 s1(7), s2(7);
  for (int i = 0; i < 10; ++i) CHECK(sample_occupation(psi, s1).index() == sample_occupation(psi, s2).index());

  StateVector unnorm = psi;
  unnorm.amplitudes *= 1.1;
  CHECK_THROWS_AS(sample_occupation(unnorm, s1), ValidationError);
}

TEST_CASE("occupation sampling matches the Born rule") {
  std::mt19937_64 rng(31);
  const auto psi = random_state(3, rng);
  const int n = 100000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < n; ++i) ++counts[sample_occupation(psi, rng).index()];
  for (int b = 0; b < 8; ++b) {
    const double p = std::norm(psi.amplitudes(b));
    CHECK(std::abs(counts[static_cast<std::size_t>(b)] - n * p) <= 4.0 * std::sqrt(n * p * (1 - p)) + 1.0);
  }
}

TEST_CASE("exact correlators") {
  const auto s = fock_state({0, 1, 0});
  for (int i = 0; i < 3; ++i) CHECK(exact_correlator(s, {i}, {i}).real() == doctest::Approx(i == 1 ? 1.0 : 0.0));

  std::mt19937_64 rng(12);
  const auto psi = random_state(5, rng);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(std::abs(exact_correlator(psi, {i}, {j}) - std::conj(exact_correlator(psi, {j}, {i}))) < 1e-12);
  CHECK(std::abs(exact_correlator(psi, {0, 2}, {1, 3}) + exact_correlator(psi, {2, 0}, {1, 3})) < 1e-12);
  CHECK_THROWS_AS(exact_correlator(psi, {0}, {0, 1}), ValidationError);
  CHECK_THROWS_AS(exact_correlator(psi, {5}, {0}), ValidationError);
}

TEST_CASE("ancilla embedding") {
  std::mt19937_64 rng(2);
  const auto psi = random_state(4, rng);
  CHECK((embed_with_ancillas(psi, 0).amplitudes - psi.amplitudes).norm() == 0.0);
  const auto big = embed_with_ancillas(psi, 1);
  CHECK(big.modes == 5);
  CHECK(std::abs(exact_correlator(big, {4}, {4})) < 1e-15);
  CHECK(std::abs(exact_correlator(big, {0}, {1}) - exact_correlator(psi, {0}, {1})) < 1e-12);
  CHECK(std::abs(exact_correlator(big, {0, 1}, {2, 3}) - exact_correlator(psi, {0, 1}, {2, 3})) < 1e-12);
}

TEST_CASE("charge density wave") {
  CHECK(std::abs(cdw_state(5).amplitudes(0b01010) - 1.0) < 1e-15);
  CHECK(std::abs(cdw_state(3).amplitudes(0b010) - 1.0) < 1e-15);
  for (int L = 1; L <= 7; ++L) {
    double n = 0.0;
    const auto s = cdw_state(L);
    for (int i = 0; i < L; ++i) n += exact_correlator(s, {i}, {i}).real();
    CHECK(n == doctest::Approx(L / 2));
  }
}

TEST_CASE("quench sampler matches apply_free_unitary") {
  std::mt19937_64 rng(6);
  const auto psi = testing_support::random_sector_state(5, 2, rng);
  const QuenchSampler sampler(psi);
  for (int trial = 0; trial < 5; ++trial) {
    const auto phi = circulant::sample_haar_phases(5, rng);
    const auto a = sampler.evolve(phi);
    const auto b = apply_free_unitary(psi, circulant::unitary_from_phases(phi));
    CHECK((a.amplitudes - b.amplitudes).norm() < 1e-10);
  }
}

TEST_CASE("outcome strings") {
  const auto o = OccupationOutcome::from_string("01101");
  CHECK(o.size() == 5);
  CHECK(o.particle_number() == 3);
  CHECK(o.index() == 0b10110);
  CHECK(OccupationOutcome::from_index(o.index(), 5).to_string() == "01101");
  CHECK_THROWS_AS(OccupationOutcome::from_string("0121"), ValidationError);
}

}  // TEST_SUITE
