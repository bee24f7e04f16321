#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fshadow/circulant.hpp"

namespace fshadow::fock {

using cplx = std::complex<double>;

inline constexpr int kMaxModes = 14;

/// Occupation-number basis. Index b has n_j = bit j of b and
/// |n> = (a0^dag)^{n0} ... (a_{L-1}^dag)^{n_{L-1}} |0>.
class FockBasis {
 public:
  explicit FockBasis(int modes);

  int modes() const { return modes_; }
  std::size_t dimension() const { return std::size_t{1} << modes_; }

  static int occupation(std::size_t b, int j) { return static_cast<int>((b >> j) & 1u); }
  /// (-1)^{sum_{k<j} n_k}
  static int jw_sign(std::size_t b, int j);

 private:
  int modes_;
};

struct StateVector {
  int modes = 0;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes.size()); }
};

struct ManyBodyOperator {
  int modes = 0;
  Eigen::MatrixXcd matrix;
  bool hermitian = false;
};

struct OccupationOutcome {
  std::vector<std::uint8_t> bits;

  int size() const { return static_cast<int>(bits.size()); }
  int particle_number() const;
  std::size_t index() const;
  /// Mode 0 leftmost.
  std::string to_string() const;
  static OccupationOutcome from_index(std::size_t b, int modes);
  static OccupationOutcome from_string(const std::string& s);
};

enum class Ladder { creation, annihilation };

StateVector fock_state(const std::vector<int>& occupations);
StateVector vacuum(int modes);

StateVector apply_ladder(const StateVector& state, int mode, Ladder kind);
ManyBodyOperator ladder_operator(int modes, int mode, Ladder kind);
ManyBodyOperator number_operator(int modes);

/// Open-boundary spinless Hubbard chain:
/// sum_{i<L-1} (a_i^dag a_{i+1} + h.c.) + sum_{i<L-1} n_i n_{i+1} + sum_i g_i n_i.
ManyBodyOperator hubbard_hamiltonian(int L, const std::vector<double>& g);

/// exp(-i H t) |psi>, by eigendecomposition (per particle-number sector when
/// H conserves N).
StateVector evolve(const StateVector& state, const ManyBodyOperator& H, double t);

/// Applies the many-body unitary U with U a_i U^dag = sum_j u_ij a_j.
StateVector apply_free_unitary(const StateVector& state, const circulant::ModeUnitary& u);

OccupationOutcome sample_occupation(const StateVector& state, std::mt19937_64& rng);

/// <psi| a^dag_{i1}..a^dag_{ik} a_{j1}..a_{jk} |psi>
cplx exact_correlator(const StateVector& state, const std::vector<int>& creation,
                      const std::vector<int>& annihilation);

StateVector embed_with_ancillas(const StateVector& state, int L_anc);

/// |0,1,0,1,...>
StateVector cdw_state(int L);

/// Occupied modes of basis index b, ascending.
std::vector<int> occupied_modes(std::size_t b, int modes);

/// Basis indices with exactly n particles, ascending.
const std::vector<std::uint32_t>& sector_states(int modes, int n);

/// Shot engine for repeated circulant quenches of one fixed input state.
/// Caches the many-body DFT per particle-number sector and the Fourier-basis
/// coefficients of the input, so each shot is one diagonal phase and one
/// dense sector matvec.
class QuenchSampler {
 public:
  explicit QuenchSampler(const StateVector& input);

  int modes() const { return modes_; }
  /// Amplitudes of U(phi)|psi> over the full Fock basis.
  StateVector evolve(const circulant::PhaseVector& phi) const;
  OccupationOutcome sample(const circulant::PhaseVector& phi, std::mt19937_64& rng) const;

 private:
  struct Sector {
    int particles;
    const std::vector<std::uint32_t>* states;
    Eigen::MatrixXcd dft;        // <J|F|I>
    Eigen::VectorXcd fourier;    // F psi restricted to the sector
  };
  int modes_;
  std::vector<Sector> sectors_;
};

/// <J|F|I> = conj(det V[I,J]) on the n-particle sector, V the DFT mode matrix.
const Eigen::MatrixXcd& sector_dft(int modes, int n);

}  // namespace fshadow::fock
