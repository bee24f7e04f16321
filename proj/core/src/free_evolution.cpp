#include <bit>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/LU>

#include "fshadow/error.hpp"
#include "fshadow/fock.hpp"

namespace fshadow::fock {

namespace {

cplx minor_det(const Eigen::MatrixXcd& u, const std::vector<int>& rows, const std::vector<int>& cols) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) return 1.0;
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = u(rows[r], cols[c]);
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return m.partialPivLu().determinant();
}

// <J|Gamma(u)|I> = conj(det u[I,J]) on the n-particle sector.
Eigen::MatrixXcd sector_image(const Eigen::MatrixXcd& u, int modes, int n) {
  const auto& states = sector_states(modes, n);
  const auto dim = static_cast<Eigen::Index>(states.size());
  std::vector<std::vector<int>> occ;
  occ.reserve(states.size());
  for (auto b : states) occ.push_back(occupied_modes(b, modes));
  Eigen::MatrixXcd W(dim, dim);
  for (Eigen::Index I = 0; I < dim; ++I)
    for (Eigen::Index J = 0; J < dim; ++J) W(J, I) = std::conj(minor_det(u, occ[I], occ[J]));
  return W;
}

double phase_sum(std::uint32_t b, const circulant::PhaseVector& phi) {
  double s = 0.0;
  while (b) {
    const int k = std::countr_zero(b);
    s += phi.phases[static_cast<std::size_t>(k)];
    b &= b - 1;
  }
  return s;
}

}  // namespace

const Eigen::MatrixXcd& sector_dft(int modes, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, Eigen::MatrixXcd> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({modes, n}); it != cache.end()) return it->second;
  }
  Eigen::MatrixXcd W = sector_image(circulant::fourier_matrix(modes), modes, n);
  std::lock_guard lock(mu);
  return cache.try_emplace({modes, n}, std::move(W)).first->second;
}

StateVector apply_free_unitary(const StateVector& state, const circulant::ModeUnitary& u) {
  require(u.size() == state.modes, "mode unitary dimension must equal the mode count");
  require(u.is_unitary(1e-10), "apply_free_unitary requires a unitary mode matrix");
  require(state.amplitudes.size() == (Eigen::Index{1} << state.modes), "state dimension mismatch");
  StateVector out{state.modes, Eigen::VectorXcd::Zero(state.amplitudes.size())};
  for (int n = 0; n <= state.modes; ++n) {
    const auto& states = sector_states(state.modes, n);
    const auto dim = static_cast<Eigen::Index>(states.size());
    Eigen::VectorXcd v(dim);
    for (Eigen::Index r = 0; r < dim; ++r) v(r) = state.amplitudes(states[r]);
    if (v.squaredNorm() == 0.0) continue;
    Eigen::VectorXcd w;
    if (u.phases) {
      const auto& F = sector_dft(state.modes, n);
      Eigen::VectorXcd c = F * v;
      for (Eigen::Index r = 0; r < dim; ++r) c(r) *= std::exp(cplx(0.0, -phase_sum(states[r], *u.phases)));
      w = F.adjoint() * c;
    } else {
      w = sector_image(u.entries, state.modes, n) * v;
    }
    for (Eigen::Index r = 0; r < dim; ++r) out.amplitudes(states[r]) = w(r);
  }
  return out;
}

QuenchSampler::QuenchSampler(const StateVector& input) : modes_(input.modes) {
  require(input.amplitudes.size() == (Eigen::Index{1} << input.modes), "state dimension mismatch");
  require(std::abs(input.norm() - 1.0) <= 1e-6, "QuenchSampler requires a normalized state");
  for (int n = 0; n <= modes_; ++n) {
    const auto& states = sector_states(modes_, n);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(states.size()));
    for (Eigen::Index r = 0; r < v.size(); ++r) v(r) = input.amplitudes(states[r]);
    if (v.squaredNorm() == 0.0) continue;
    const auto& F = sector_dft(modes_, n);
    sectors_.push_back({n, &states, F, F * v});
  }
}

StateVector QuenchSampler::evolve(const circulant::PhaseVector& phi) const {
  require(phi.size() == modes_, "phase vector length must equal the mode count");
  StateVector out{modes_, Eigen::VectorXcd::Zero(Eigen::Index{1} << modes_)};
  for (const auto& s : sectors_) {
    Eigen::VectorXcd c = s.fourier;
    for (Eigen::Index r = 0; r < c.size(); ++r) c(r) *= std::exp(cplx(0.0, -phase_sum((*s.states)[r], phi)));
    const Eigen::VectorXcd w = s.dft.adjoint() * c;
    for (Eigen::Index r = 0; r < w.size(); ++r) out.amplitudes((*s.states)[r]) = w(r);
  }
  return out;
}

OccupationOutcome QuenchSampler::sample(const circulant::PhaseVector& phi, std::mt19937_64& rng) const {
  require(phi.size() == modes_, "phase vector length must equal the mode count");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = unif(rng);
  double acc = 0.0;
  std::uint32_t last = 0;
  for (const auto& s : sectors_) {
    Eigen::VectorXcd c = s.fourier;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(cplx(0.0, -phase_sum((*s.states)[k], phi)));
    const Eigen::VectorXcd w = s.dft.adjoint() * c;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double p = std::norm(w(k));
      if (p == 0.0) continue;
      last = (*s.states)[k];
      acc += p;
      if (r < acc) return OccupationOutcome::from_index(last, modes_);
    }
  }
  return OccupationOutcome::from_index(last, modes_);
}

}  // namespace fshadow::fock
