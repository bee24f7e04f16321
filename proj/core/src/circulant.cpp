#include "fshadow/circulant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fshadow/commutant.hpp"
#include "fshadow/error.hpp"

namespace fshadow::circulant {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

// First column of the circulant with eigenphases phi: u_{a,0} = (1/L) sum_k e^{i phi_k} w^{ka}.
Eigen::VectorXcd first_column(const std::vector<double>& phi) {
  const auto L = static_cast<Eigen::Index>(phi.size());
  Eigen::VectorXcd col = Eigen::VectorXcd::Zero(L);
  for (Eigen::Index a = 0; a < L; ++a) {
    cplx acc = 0.0;
    for (Eigen::Index k = 0; k < L; ++k)
      acc += std::polar(1.0, phi[static_cast<std::size_t>(k)] + kTwoPi * static_cast<double>((k * a) % L) / L);
    col(a) = acc / static_cast<double>(L);
  }
  return col;
}

std::vector<double> cosines(int L) {
  std::vector<double> c(static_cast<std::size_t>(L / 2 + 1));
  for (int k = 0; k <= L / 2; ++k) c[static_cast<std::size_t>(k)] = std::cos(kTwoPi * k / L);
  return c;
}

void check_kappa_args(int t, int L) {
  require(t == 2 || t == 4, "kappa supports t = 2 or 4");
  require(L >= 1, "kappa requires L >= 1");
  require(L % 2 == 1, "kappa requires odd L");
}

// Gauss-Legendre nodes/weights on [-1, 1] via the Golub-Welsch eigenproblem.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    w[static_cast<std::size_t>(i)] = 2.0 * v0 * v0;
  }
}

// Column vector of E u^{(x)2} (x) ubar^{(x)2} |0>^{(x)4}, entry [((a*L+b)*L+c)*L+d].
using Column = std::vector<cplx>;

void accumulate_column(Column& col, const Eigen::VectorXcd& u0, double weight) {
  const auto L = static_cast<std::size_t>(u0.size());
  std::size_t idx = 0;
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b) {
      const cplx ab = u0(static_cast<Eigen::Index>(a)) * u0(static_cast<Eigen::Index>(b)) * weight;
      for (std::size_t c = 0; c < L; ++c) {
        const cplx abc = ab * std::conj(u0(static_cast<Eigen::Index>(c)));
        for (std::size_t d = 0; d < L; ++d, ++idx) col[idx] += abc * std::conj(u0(static_cast<Eigen::Index>(d)));
      }
    }
}

Column haar_column_commutant(int L) {
  const fshadow::channel::MomentOracle oracle(2, L);
  const auto n = static_cast<std::size_t>(L);
  Column col(n * n * n * n);
  std::size_t idx = 0;
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b)
      for (int c = 0; c < L; ++c)
        for (int d = 0; d < L; ++d, ++idx) col[idx] = oracle.moment({c, d}, {0, 0}, {a, b}, {0, 0});
  return col;
}

// Haar column from the torus average in the Fourier domain: the phase factor
// survives iff the folded multisets {|y1|,|y2|} and {|x1|,|x2|} agree.
Column haar_column_fourier(int L) {
  const auto n = static_cast<std::size_t>(L);
  auto fold = [L](int v) { return std::min(v, L - v); };
  Column col(n * n * n * n, 0.0);
  const double scale = 1.0 / std::pow(static_cast<double>(L), 4);
  for (int x1 = 0; x1 < L; ++x1)
    for (int x2 = 0; x2 < L; ++x2)
      for (int y1 = 0; y1 < L; ++y1)
        for (int y2 = 0; y2 < L; ++y2) {
          int fx[2] = {fold(x1), fold(x2)}, fy[2] = {fold(y1), fold(y2)};
          std::sort(fx, fx + 2);
          std::sort(fy, fy + 2);
          if (fx[0] != fy[0] || fx[1] != fy[1]) continue;
          std::size_t idx = 0;
          for (int a = 0; a < L; ++a)
            for (int b = 0; b < L; ++b)
              for (int c = 0; c < L; ++c)
                for (int d = 0; d < L; ++d, ++idx) {
                  const long e = static_cast<long>(y1) * a + static_cast<long>(y2) * b - static_cast<long>(x1) * c -
                                 static_cast<long>(x2) * d;
                  col[idx] += std::polar(scale, kTwoPi * static_cast<double>(((e % L) + L) % L) / L);
                }
        }
  return col;
}

double squared_distance(const Column& a, const Column& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return acc;
}

}  // namespace

bool PhaseVector::is_symmetric(double tol) const {
  const int L = size();
  for (int k = 1; k < L; ++k) {
    const double diff = std::remainder(phases[static_cast<std::size_t>(k)] - phases[static_cast<std::size_t>(L - k)], kTwoPi);
    if (std::abs(diff) > tol) return false;
  }
  return true;
}

bool ModeUnitary::is_unitary(double tol) const {
  const auto n = entries.rows();
  if (entries.cols() != n) return false;
  return (entries.adjoint() * entries - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

bool ModeUnitary::is_circulant(double tol) const {
  const auto L = entries.rows();
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < L; ++j)
      if (std::abs(entries(i, j) - entries((i + 1) % L, (j + 1) % L)) > tol) return false;
  return true;
}

bool ModeUnitary::is_symmetric(double tol) const {
  return (entries - entries.transpose()).cwiseAbs().maxCoeff() <= tol;
}

EnsembleSpec EnsembleSpec::haar(int L) { return {EnsembleKind::haar_cusym, L, 0.0, 0.0, 0.0}; }

EnsembleSpec EnsembleSpec::uniform(int L, double alpha_max) { return {EnsembleKind::nn_uniform, L, alpha_max, 0.0, 0.0}; }

EnsembleSpec EnsembleSpec::normal(int L, double mu, double sigma) { return {EnsembleKind::nn_normal, L, 0.0, mu, sigma}; }

void EnsembleSpec::validate() const {
  require(L >= 1, "ensemble needs L >= 1");
  if (kind == EnsembleKind::nn_uniform) require(alpha_max > 0.0, "nn_uniform needs alpha_max > 0");
  if (kind == EnsembleKind::nn_normal) require(sigma > 0.0, "nn_normal needs sigma > 0");
}

const char* to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::haar_cusym: return "haar_cusym";
    case EnsembleKind::nn_uniform: return "nn_uniform";
    case EnsembleKind::nn_normal: return "nn_normal";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  if (name == "haar_cusym" || name == "haar") return EnsembleKind::haar_cusym;
  if (name == "nn_uniform" || name == "uniform") return EnsembleKind::nn_uniform;
  if (name == "nn_normal" || name == "normal") return EnsembleKind::nn_normal;
  throw ValidationError("unknown ensemble kind '" + name + "'");
}

Eigen::VectorXcd fourier_vector(int k, int L) {
  require(L >= 1 && k >= 0 && k < L, "fourier_vector needs 0 <= k < L");
  Eigen::VectorXcd v(L);
  const double s = 1.0 / std::sqrt(static_cast<double>(L));
  for (int b = 0; b < L; ++b) v(b) = std::polar(s, kTwoPi * static_cast<double>((static_cast<long>(k) * b) % L) / L);
  return v;
}

Eigen::MatrixXcd fourier_matrix(int L) {
  Eigen::MatrixXcd V(L, L);
  for (int k = 0; k < L; ++k) V.col(k) = fourier_vector(k, L);
  return V;
}

ModeUnitary unitary_from_phases(const PhaseVector& phi) {
  const int L = phi.size();
  require(L >= 1, "phase vector must be non-empty");
  require(phi.is_symmetric(1e-12), "phase vector violates phi_{L-k} = phi_k");
  const Eigen::VectorXcd col = first_column(phi.phases);
  ModeUnitary u;
  u.entries.resize(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) u.entries(i, j) = col(((i - j) % L + L) % L);
  u.phases = phi;
  return u;
}

PhaseVector sample_haar_phases(int L, std::mt19937_64& rng) {
  require(L >= 1, "sample_haar_phases needs L >= 1");
  std::uniform_real_distribution<double> unif(0.0, kTwoPi);
  PhaseVector phi;
  phi.phases.resize(static_cast<std::size_t>(L));
  for (int k = 0; k <= L / 2; ++k) phi.phases[static_cast<std::size_t>(k)] = unif(rng);
  for (int k = L / 2 + 1; k < L; ++k) phi.phases[static_cast<std::size_t>(k)] = phi.phases[static_cast<std::size_t>(L - k)];
  return phi;
}

ModeUnitary sample_haar_cusym(int L, std::mt19937_64& rng) { return unitary_from_phases(sample_haar_phases(L, rng)); }

PhaseVector nn_phases(double alpha, int L) {
  require(L >= 1, "nn_phases needs L >= 1");
  PhaseVector phi;
  phi.phases.resize(static_cast<std::size_t>(L));
  for (int k = 0; k <= L / 2; ++k) phi.phases[static_cast<std::size_t>(k)] = wrap(2.0 * alpha * std::cos(kTwoPi * k / L));
  for (int k = L / 2 + 1; k < L; ++k) phi.phases[static_cast<std::size_t>(k)] = phi.phases[static_cast<std::size_t>(L - k)];
  return phi;
}

EnsembleDraw sample_ensemble(const EnsembleSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  EnsembleDraw draw;
  switch (spec.kind) {
    case EnsembleKind::haar_cusym:
      draw.phases = sample_haar_phases(spec.L, rng);
      break;
    case EnsembleKind::nn_uniform: {
      std::uniform_real_distribution<double> unif(0.0, spec.alpha_max);
      draw.alpha = unif(rng);
      draw.phases = nn_phases(*draw.alpha, spec.L);
      break;
    }
    case EnsembleKind::nn_normal: {
      std::normal_distribution<double> gauss(spec.mu, spec.sigma);
      double a = gauss(rng);
      while (std::abs(a - spec.mu) > 8.0 * spec.sigma) a = gauss(rng);
      draw.alpha = a;
      draw.phases = nn_phases(a, spec.L);
      break;
    }
  }
  draw.u = unitary_from_phases(draw.phases);
  return draw;
}

double kappa(int t, int L) {
  check_kappa_args(t, L);
  const auto c = cosines(L);
  const int h = L / 2, n = h + 1;
  double best = std::numeric_limits<double>::infinity();
  if (t == 2) {
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
          for (int q = 0; q < n; ++q) {
            if ((k == m && l == q) || (k == q && l == m)) continue;
            best = std::min(best, std::abs(c[k] + c[l] - c[m] - c[q]));
          }
    return best;
  }
  std::vector<int> idx(8, 0);
  while (true) {
    int x[4] = {idx[0], idx[1], idx[2], idx[3]}, y[4] = {idx[4], idx[5], idx[6], idx[7]};
    std::sort(x, x + 4);
    std::sort(y, y + 4);
    if (!std::equal(x, x + 4, y)) {
      double s = 0.0;
      for (int r = 0; r < 4; ++r) s += c[static_cast<std::size_t>(x[r])] - c[static_cast<std::size_t>(y[r])];
      best = std::min(best, std::abs(s));
    }
    int pos = 7;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == n) idx[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return best;
}

double kappa_sorted(int t, int L) {
  check_kappa_args(t, L);
  const auto c = cosines(L);
  const int n = L / 2 + 1;
  std::vector<double> sums;
  if (t == 2) {
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) sums.push_back(c[k] + c[l]);
  } else {
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        for (int e = b; e < n; ++e)
          for (int f = e; f < n; ++f) sums.push_back(c[a] + c[b] + c[e] + c[f]);
  }
  std::sort(sums.begin(), sums.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sums.size(); ++i) best = std::min(best, sums[i] - sums[i - 1]);
  return best;
}

double design_error_bound(const EnsembleSpec& spec, int t) {
  if (spec.kind == EnsembleKind::haar_cusym) return 0.0;
  const double k = kappa(t, spec.L);
  if (k <= 1e-12) throw ValidationError("kappa vanishes: the ensemble cannot approximate Haar moments");
  if (spec.kind == EnsembleKind::nn_uniform) {
    require(spec.alpha_max > 0.0, "nn_uniform needs alpha_max > 0");
    return 2.0 / (spec.alpha_max * k);
  }
  require(spec.sigma >= 0.0, "nn_normal needs sigma >= 0");
  return std::exp(-spec.sigma * spec.sigma * k * k);
}

double empirical_moment_deviation(const EnsembleSpec& spec, int t, int quadrature_points) {
  require(t == 2, "empirical_moment_deviation supports t = 2");
  require(spec.L % 2 == 1 && spec.L >= 1, "empirical_moment_deviation requires odd L");
  require(spec.L <= 9, "empirical_moment_deviation requires L <= 9");
  const int L = spec.L;
  const Column haar = haar_column_commutant(L);
  if (spec.kind == EnsembleKind::haar_cusym) return squared_distance(haar, haar_column_fourier(L));
  spec.validate();

  double lo = 0.0, hi = 0.0, span = 0.0;
  if (spec.kind == EnsembleKind::nn_uniform) {
    lo = 0.0;
    hi = spec.alpha_max;
    span = spec.alpha_max;
  } else {
    lo = spec.mu - 8.0 * spec.sigma;
    hi = spec.mu + 8.0 * spec.sigma;
    span = hi - lo;
  }
  require(static_cast<double>(quadrature_points) >= 10.0 * span * L,
          "quadrature_points must be at least 10 * alpha_range * L");

  constexpr int kOrder = 8;
  std::vector<double> gx, gw;
  gauss_legendre(kOrder, gx, gw);
  const double max_width = std::numbers::pi / (4.0 * L);
  const long panels = std::max<long>({static_cast<long>(std::ceil(static_cast<double>(quadrature_points) / kOrder)),
                                      static_cast<long>(std::ceil(span / max_width)), 1L});
  const double mass = std::erf(8.0 / std::sqrt(2.0));

  auto integrate = [&](long npanels) {
    Column col(haar.size(), 0.0);
    const double width = (hi - lo) / static_cast<double>(npanels);
    for (long p = 0; p < npanels; ++p) {
      const double a = lo + width * static_cast<double>(p);
      for (int q = 0; q < kOrder; ++q) {
        const double alpha = a + 0.5 * width * (gx[static_cast<std::size_t>(q)] + 1.0);
        double density = 1.0 / span;
        if (spec.kind == EnsembleKind::nn_normal) {
          const double z = (alpha - spec.mu) / spec.sigma;
          density = std::exp(-0.5 * z * z) / (spec.sigma * std::sqrt(2.0 * std::numbers::pi) * mass);
        }
        accumulate_column(col, first_column(nn_phases(alpha, L).phases),
                          0.5 * width * gw[static_cast<std::size_t>(q)] * density);
      }
    }
    return squared_distance(haar, col);
  };
  const double coarse = integrate(panels);
  const double fine = integrate(2 * panels);
  if (std::abs(coarse - fine) > 1e-8 * std::abs(fine) + 1e-14)
    throw QuadratureError("insufficient quadrature resolution: Richardson check failed");
  return fine;
}

}  // namespace fshadow::circulant
