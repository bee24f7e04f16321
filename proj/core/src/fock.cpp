#include "fshadow/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "fshadow/error.hpp"

namespace fshadow::fock {

namespace {

void check_modes(int modes) {
  require(modes >= 0 && modes <= kMaxModes,
          "mode count must lie in [0, " + std::to_string(kMaxModes) + "]");
}

void check_state(const StateVector& s) {
  require(s.amplitudes.size() == static_cast<Eigen::Index>(std::size_t{1} << s.modes),
          "state dimension does not match 2^modes");
}

// Applies a_j or a_j^dag to basis index b. Returns false if the result vanishes.
bool ladder_on_basis(std::size_t b, int j, Ladder kind, std::size_t& out, int& sign) {
  const bool occ = (b >> j) & 1u;
  if ((kind == Ladder::annihilation) != occ) return false;
  sign = FockBasis::jw_sign(b, j);
  out = b ^ (std::size_t{1} << j);
  return true;
}

// Sign of a^dag_i a_j on b, or 0 if it annihilates b.
int hop_on_basis(std::size_t b, int i, int j, std::size_t& out) {
  std::size_t mid = 0;
  int s1 = 0, s2 = 0;
  if (!ladder_on_basis(b, j, Ladder::annihilation, mid, s1)) return 0;
  if (!ladder_on_basis(mid, i, Ladder::creation, out, s2)) return 0;
  return s1 * s2;
}

bool conserves_number(const ManyBodyOperator& H) {
  for (Eigen::Index c = 0; c < H.matrix.cols(); ++c)
    for (Eigen::Index r = 0; r < H.matrix.rows(); ++r)
      if (H.matrix(r, c) != cplx{} &&
          std::popcount(static_cast<std::size_t>(r)) != std::popcount(static_cast<std::size_t>(c)))
        return false;
  return true;
}

}  // namespace

FockBasis::FockBasis(int modes) : modes_(modes) { check_modes(modes); }

int FockBasis::jw_sign(std::size_t b, int j) {
  const std::size_t below = b & ((std::size_t{1} << j) - 1);
  return (std::popcount(below) & 1) ? -1 : 1;
}

int OccupationOutcome::particle_number() const {
  int n = 0;
  for (auto v : bits) n += v;
  return n;
}

std::size_t OccupationOutcome::index() const {
  std::size_t b = 0;
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j]) b |= std::size_t{1} << j;
  return b;
}

std::string OccupationOutcome::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (auto v : bits) s.push_back(v ? '1' : '0');
  return s;
}

OccupationOutcome OccupationOutcome::from_index(std::size_t b, int modes) {
  OccupationOutcome o;
  o.bits.resize(static_cast<std::size_t>(modes));
  for (int j = 0; j < modes; ++j) o.bits[static_cast<std::size_t>(j)] = (b >> j) & 1u;
  return o;
}

OccupationOutcome OccupationOutcome::from_string(const std::string& s) {
  OccupationOutcome o;
  for (char c : s) {
    require(c == '0' || c == '1', "outcome bits must be 0/1");
    o.bits.push_back(c == '1');
  }
  return o;
}

std::vector<int> occupied_modes(std::size_t b, int modes) {
  std::vector<int> occ;
  for (int j = 0; j < modes; ++j)
    if ((b >> j) & 1u) occ.push_back(j);
  return occ;
}

const std::vector<std::uint32_t>& sector_states(int modes, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<std::uint32_t>> cache;
  std::lock_guard lock(mu);
  auto [it, fresh] = cache.try_emplace({modes, n});
  if (fresh) {
    for (std::uint32_t b = 0; b < (1u << modes); ++b)
      if (std::popcount(b) == n) it->second.push_back(b);
  }
  return it->second;
}

StateVector vacuum(int modes) {
  check_modes(modes);
  StateVector s{modes, Eigen::VectorXcd::Zero(Eigen::Index{1} << modes)};
  s.amplitudes(0) = 1.0;
  return s;
}

StateVector fock_state(const std::vector<int>& occupations) {
  const int modes = static_cast<int>(occupations.size());
  StateVector s = vacuum(modes);
  std::size_t b = 0;
  for (int j = 0; j < modes; ++j) {
    require(occupations[j] == 0 || occupations[j] == 1, "occupations must be 0 or 1");
    if (occupations[j]) b |= std::size_t{1} << j;
  }
  s.amplitudes(0) = 0.0;
  s.amplitudes(static_cast<Eigen::Index>(b)) = 1.0;
  return s;
}

StateVector apply_ladder(const StateVector& state, int mode, Ladder kind) {
  check_state(state);
  require(mode >= 0 && mode < state.modes, "mode index out of range");
  StateVector out{state.modes, Eigen::VectorXcd::Zero(state.amplitudes.size())};
  for (std::size_t b = 0; b < state.dimension(); ++b) {
    const cplx a = state.amplitudes(static_cast<Eigen::Index>(b));
    if (a == cplx{}) continue;
    std::size_t nb = 0;
    int sign = 0;
    if (ladder_on_basis(b, mode, kind, nb, sign))
      out.amplitudes(static_cast<Eigen::Index>(nb)) += static_cast<double>(sign) * a;
  }
  return out;
}

ManyBodyOperator ladder_operator(int modes, int mode, Ladder kind) {
  check_modes(modes);
  require(mode >= 0 && mode < modes, "mode index out of range");
  const std::size_t dim = std::size_t{1} << modes;
  ManyBodyOperator op{modes, Eigen::MatrixXcd::Zero(dim, dim), false};
  for (std::size_t b = 0; b < dim; ++b) {
    std::size_t nb = 0;
    int sign = 0;
    if (ladder_on_basis(b, mode, kind, nb, sign))
      op.matrix(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(b)) = sign;
  }
  return op;
}

ManyBodyOperator number_operator(int modes) {
  check_modes(modes);
  const std::size_t dim = std::size_t{1} << modes;
  ManyBodyOperator op{modes, Eigen::MatrixXcd::Zero(dim, dim), true};
  for (std::size_t b = 0; b < dim; ++b)
    op.matrix(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = std::popcount(b);
  return op;
}

ManyBodyOperator hubbard_hamiltonian(int L, const std::vector<double>& g) {
  check_modes(L);
  require(static_cast<int>(g.size()) == L, "field vector length must equal L");
  const std::size_t dim = std::size_t{1} << L;
  ManyBodyOperator H{L, Eigen::MatrixXcd::Zero(dim, dim), true};
  for (std::size_t b = 0; b < dim; ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    for (int i = 0; i + 1 < L; ++i) {
      std::size_t nb = 0;
      if (int s = hop_on_basis(b, i, i + 1, nb)) H.matrix(static_cast<Eigen::Index>(nb), col) += s;
      if (int s = hop_on_basis(b, i + 1, i, nb)) H.matrix(static_cast<Eigen::Index>(nb), col) += s;
      H.matrix(col, col) += FockBasis::occupation(b, i) * FockBasis::occupation(b, i + 1);
    }
    for (int i = 0; i < L; ++i) H.matrix(col, col) += g[static_cast<std::size_t>(i)] * FockBasis::occupation(b, i);
  }
  return H;
}

StateVector evolve(const StateVector& state, const ManyBodyOperator& H, double t) {
  check_state(state);
  require(H.modes == state.modes, "operator and state mode counts differ");
  require((H.matrix - H.matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-12,
          "evolve requires a Hermitian generator");
  StateVector out{state.modes, Eigen::VectorXcd::Zero(state.amplitudes.size())};
  auto evolve_block = [&](const std::vector<Eigen::Index>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd h(n, n);
    Eigen::VectorXcd v(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      v(r) = state.amplitudes(idx[r]);
      for (Eigen::Index c = 0; c < n; ++c) h(r, c) = H.matrix(idx[r], idx[c]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phase(n);
    for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::exp(cplx(0.0, -es.eigenvalues()(k) * t));
    const Eigen::VectorXcd w = es.eigenvectors() * phase.cwiseProduct(es.eigenvectors().adjoint() * v);
    for (Eigen::Index r = 0; r < n; ++r) out.amplitudes(idx[r]) = w(r);
  };
  if (conserves_number(H)) {
    for (int n = 0; n <= state.modes; ++n) {
      std::vector<Eigen::Index> idx;
      for (auto b : sector_states(state.modes, n)) idx.push_back(b);
      evolve_block(idx);
    }
  } else {
    std::vector<Eigen::Index> idx(state.dimension());
    for (std::size_t b = 0; b < idx.size(); ++b) idx[b] = static_cast<Eigen::Index>(b);
    evolve_block(idx);
  }
  return out;
}

OccupationOutcome sample_occupation(const StateVector& state, std::mt19937_64& rng) {
  check_state(state);
  const double nrm = state.norm();
  require(std::abs(nrm - 1.0) <= 1e-6, "sample_occupation requires a normalized state");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = unif(rng) * nrm * nrm;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t b = 0; b < state.dimension(); ++b) {
    const double p = std::norm(state.amplitudes(static_cast<Eigen::Index>(b)));
    if (p == 0.0) continue;
    last = b;
    acc += p;
    if (r < acc) return OccupationOutcome::from_index(b, state.modes);
  }
  return OccupationOutcome::from_index(last, state.modes);
}

cplx exact_correlator(const StateVector& state, const std::vector<int>& creation,
                      const std::vector<int>& annihilation) {
  check_state(state);
  require(creation.size() == annihilation.size() && !creation.empty(),
          "correlator needs equal, nonzero numbers of creation and annihilation indices");
  for (int i : creation) require(i >= 0 && i < state.modes, "correlator index out of range");
  for (int j : annihilation) require(j >= 0 && j < state.modes, "correlator index out of range");
  StateVector phi = state;
  for (auto it = annihilation.rbegin(); it != annihilation.rend(); ++it)
    phi = apply_ladder(phi, *it, Ladder::annihilation);
  for (auto it = creation.rbegin(); it != creation.rend(); ++it)
    phi = apply_ladder(phi, *it, Ladder::creation);
  return state.amplitudes.dot(phi.amplitudes);
}

StateVector embed_with_ancillas(const StateVector& state, int L_anc) {
  check_state(state);
  require(L_anc >= 0, "ancilla count must be non-negative");
  const int modes = state.modes + L_anc;
  check_modes(modes);
  // Ancillas occupy the high bits, so the system amplitudes keep their indices.
  StateVector out{modes, Eigen::VectorXcd::Zero(Eigen::Index{1} << modes)};
  out.amplitudes.head(state.amplitudes.size()) = state.amplitudes;
  return out;
}

StateVector cdw_state(int L) {
  require(L >= 1, "cdw_state needs L >= 1");
  std::vector<int> occ(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) occ[static_cast<std::size_t>(j)] = j % 2;
  return fock_state(occ);
}

}  // namespace fshadow::fock
