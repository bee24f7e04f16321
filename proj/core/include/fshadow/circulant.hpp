#pragma once

#include <complex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fshadow::circulant {

using cplx = std::complex<double>;

/// Eigenphases of a circulant unitary on the Fourier basis. For symmetric
/// circulants phases[L-k] == phases[k].
struct PhaseVector {
  std::vector<double> phases;

  int size() const { return static_cast<int>(phases.size()); }
  bool is_symmetric(double tol = 1e-12) const;
};

/// L x L mode-space unitary. Protocol unitaries keep their phase vector so
/// the many-body image can be built in the Fourier-mode basis.
struct ModeUnitary {
  Eigen::MatrixXcd entries;
  std::optional<PhaseVector> phases;

  int size() const { return static_cast<int>(entries.rows()); }
  bool is_unitary(double tol = 1e-10) const;
  bool is_circulant(double tol = 1e-12) const;
  bool is_symmetric(double tol = 1e-12) const;
};

enum class EnsembleKind { haar_cusym, nn_uniform, nn_normal };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::haar_cusym;
  int L = 0;
  double alpha_max = 0.0;
  double mu = 0.0;
  double sigma = 0.0;

  static EnsembleSpec haar(int L);
  static EnsembleSpec uniform(int L, double alpha_max);
  static EnsembleSpec normal(int L, double mu, double sigma);

  void validate() const;
};

const char* to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

/// One ensemble draw. For nn kinds `alpha` holds the quench parameter; for
/// the Haar kind it is unset and `phases` is the sampled torus point.
struct EnsembleDraw {
  std::optional<double> alpha;
  PhaseVector phases;
  ModeUnitary u;
};

/// v^(k)_b = exp(2 pi i k b / L) / sqrt(L).
Eigen::VectorXcd fourier_vector(int k, int L);

/// Columns are the Fourier vectors v^(0..L-1).
Eigen::MatrixXcd fourier_matrix(int L);

/// u = sum_k e^{i phi_k} v^(k) v^(k)^dagger.
ModeUnitary unitary_from_phases(const PhaseVector& phi);

PhaseVector sample_haar_phases(int L, std::mt19937_64& rng);
ModeUnitary sample_haar_cusym(int L, std::mt19937_64& rng);

/// phi_k = 2 alpha cos(2 pi k / L) mod 2 pi, i.e. u = exp(i alpha h_hop).
PhaseVector nn_phases(double alpha, int L);

EnsembleDraw sample_ensemble(const EnsembleSpec& spec, std::mt19937_64& rng);

/// Design diagnostic kappa^(t)(L), t in {2, 4}. Nested-loop enumeration.
double kappa(int t, int L);
/// Same quantity via sorted cosine sums; kept as an independent coding.
double kappa_sorted(int t, int L);

double design_error_bound(const EnsembleSpec& spec, int t);

/// Squared 2-norm between the Haar column E u^{(x)2} (x) ubar^{(x)2} |0>^{(x)4}
/// and the ensemble column, the latter by composite Gauss-Legendre quadrature.
double empirical_moment_deviation(const EnsembleSpec& spec, int t, int quadrature_points);

}  // namespace fshadow::circulant
