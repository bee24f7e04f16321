#include "fshadow/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "fshadow/error.hpp"

namespace fshadow::channel {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void combos(int L, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int v = start; v < L; ++v) {
    cur.push_back(v);
    combos(L, k, v + 1, cur, out);
    cur.pop_back();
  }
}

std::size_t tuple_code(const std::vector<int>& t, int L) {
  std::size_t c = 0;
  for (int v : t) c = c * static_cast<std::size_t>(L) + static_cast<std::size_t>(v);
  return c;
}

// Bubble sort with parity; returns 0 on a repeated entry.
int sort_with_sign(std::vector<int>& v) {
  int sign = 1;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = 0; b + 1 < v.size() - a; ++b) {
      if (v[b] == v[b + 1]) return 0;
      if (v[b] > v[b + 1]) {
        std::swap(v[b], v[b + 1]);
        sign = -sign;
      }
    }
  for (std::size_t a = 0; a + 1 < v.size(); ++a)
    if (v[a] == v[a + 1]) return 0;
  return sign;
}

int mod(int v, int L) { return ((v % L) + L) % L; }

}  // namespace

CorrelatorBasis::CorrelatorBasis(int k, int L) : k_(k), L_(L) {
  require(k == 1 || k == 2, "correlator basis supports k = 1 or 2");
  require(L >= k, "correlator basis needs L >= k");
  std::vector<int> cur;
  combos(L, k, 0, cur, tuples_);
  std::size_t cells = 1;
  for (int r = 0; r < k; ++r) cells *= static_cast<std::size_t>(L);
  lookup_.assign(cells, kNone);
  for (std::size_t r = 0; r < tuples_.size(); ++r) lookup_[tuple_code(tuples_[r], L)] = r;
}

std::size_t CorrelatorBasis::tuple_index(const std::vector<int>& sorted) const {
  require(static_cast<int>(sorted.size()) == k_, "tuple length must equal k");
  for (int v : sorted) require(v >= 0 && v < L_, "tuple index out of range");
  const std::size_t r = lookup_[tuple_code(sorted, L_)];
  require(r != kNone, "tuple must be strictly increasing");
  return r;
}

std::size_t CorrelatorBasis::index(const std::vector<int>& creation, const std::vector<int>& annihilation) const {
  return tuple_index(creation) * tuples_.size() + tuple_index(annihilation);
}

CorrelatorBasis::Canonical CorrelatorBasis::canonical(std::vector<int> creation, std::vector<int> annihilation) const {
  for (auto* v : {&creation, &annihilation}) {
    require(static_cast<int>(v->size()) == k_, "tuple length must equal k");
    for (int x : *v) require(x >= 0 && x < L_, "tuple index out of range");
  }
  const int s = sort_with_sign(creation) * sort_with_sign(annihilation);
  if (s == 0) return {0, 0};
  return {s, index(creation, annihilation)};
}

const Spectrum& ChannelMatrix::spectrum() const {
  if (!spectrum_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries);
    spectrum_ = Spectrum{es.eigenvalues(), es.eigenvectors()};
  }
  return *spectrum_;
}

Eigen::Index ChannelMatrix::rank(double tol) const {
  const auto& ev = spectrum().values;
  const double cut = tol * ev.cwiseAbs().maxCoeff();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r += ev(i) > cut;
  return r;
}

double m2_entry(int i, int j, int l, int m, int L) {
  require(L % 2 == 1, "m2_entry requires odd L");
  for (int v : {i, j, l, m}) require(v >= 0 && v < L, "m2_entry index out of range");
  const double dij_lm = (i == j && l == m) ? 1.0 : 0.0;
  const double dil_jm = (i == l && j == m) ? 1.0 : 0.0;
  const double diff = mod(i - j, L) == mod(l - m, L) ? 1.0 : 0.0;
  return (dij_lm + dil_jm - diff / L) / L;
}

ChannelMatrix m2_matrix(int L) {
  require(L % 2 == 1, "m2_matrix requires odd L");
  const CorrelatorBasis basis(1, L);
  const auto d = static_cast<Eigen::Index>(basis.size());
  ChannelMatrix M;
  M.k = 1;
  M.L = L;
  M.entries.resize(d, d);
  for (Eigen::Index s = 0; s < d; ++s)
    for (Eigen::Index h = 0; h < d; ++h)
      M.entries(s, h) = m2_entry(basis.creation(s)[0], basis.annihilation(s)[0], basis.creation(h)[0],
                                 basis.annihilation(h)[0], L);
  return M;
}

std::vector<Eigen::VectorXd> kernel_basis_2pt(int L) {
  require(L % 2 == 1, "kernel_basis_2pt requires odd L");
  const CorrelatorBasis basis(1, L);
  std::vector<Eigen::VectorXd> out;
  for (int k = 1; k < L; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    for (int i = 0; i < L; ++i) v(static_cast<Eigen::Index>(basis.index({i}, {mod(i + k, L)}))) = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Eigen::VectorXd> image_basis_2pt(int L) {
  require(L % 2 == 1, "image_basis_2pt requires odd L");
  const CorrelatorBasis basis(1, L);
  const auto d = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i + 1 < L; ++i)
    for (int j = 0; j < L; ++j) {
      if (j == i) continue;
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v(static_cast<Eigen::Index>(basis.index({i}, {j}))) += 1.0;
      v(static_cast<Eigen::Index>(basis.index({L - 1}, {mod(j - i - 1, L)}))) -= 1.0;
      out.push_back(std::move(v));
    }
  for (int i = 0; i < L; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    v(static_cast<Eigen::Index>(basis.index({i}, {i}))) = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

ChannelMatrix spectral_map(const ChannelMatrix& M, double tol, bool invert) {
  const auto& sp = M.spectrum();
  const double cut = tol * sp.values.cwiseAbs().maxCoeff();
  Eigen::VectorXd f(sp.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i)
    f(i) = sp.values(i) > cut ? (invert ? 1.0 / sp.values(i) : 1.0) : 0.0;
  ChannelMatrix out;
  out.k = M.k;
  out.L = M.L;
  out.entries = sp.vectors * f.asDiagonal() * sp.vectors.transpose();
  out.entries = 0.5 * (out.entries + out.entries.transpose()).eval();
  return out;
}

}  // namespace

ChannelMatrix pseudo_inverse(const ChannelMatrix& M, double tol) { return spectral_map(M, tol, true); }

ChannelMatrix image_projector(const ChannelMatrix& M, double tol) { return spectral_map(M, tol, false); }

}  // namespace fshadow::channel
