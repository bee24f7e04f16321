#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "fshadow/fock.hpp"

namespace testing_support {

inline fshadow::fock::StateVector random_state(int modes, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  fshadow::fock::StateVector s;
  s.modes = modes;
  s.amplitudes.resize(static_cast<Eigen::Index>(std::size_t{1} << modes));
  for (Eigen::Index b = 0; b < s.amplitudes.size(); ++b) s.amplitudes(b) = {g(rng), g(rng)};
  s.amplitudes.normalize();
  return s;
}

// Random state with fixed particle number.
inline fshadow::fock::StateVector random_sector_state(int modes, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  fshadow::fock::StateVector s;
  s.modes = modes;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(std::size_t{1} << modes));
  for (auto b : fshadow::fock::sector_states(modes, n)) s.amplitudes(b) = {g(rng), g(rng)};
  s.amplitudes.normalize();
  return s;
}

}  // namespace testing_support
