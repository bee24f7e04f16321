#include "fshadow/commutant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fshadow/error.hpp"

namespace fshadow::channel {

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::vector<int> decode(std::size_t code, int t, int L) {
  std::vector<int> x(static_cast<std::size_t>(t));
  for (int r = t - 1; r >= 0; --r) {
    x[static_cast<std::size_t>(r)] = static_cast<int>(code % static_cast<std::size_t>(L));
    code /= static_cast<std::size_t>(L);
  }
  return x;
}

std::size_t encode_vec(const std::vector<int>& x, int L) {
  std::size_t c = 0;
  for (int v : x) c = c * static_cast<std::size_t>(L) + static_cast<std::size_t>(((v % L) + L) % L);
  return c;
}

}  // namespace

std::vector<CommutantClass> commutant_classes(int t, int L) {
  require(t >= 1 && t <= 8, "commutant classes need 1 <= t <= 8");
  require(L >= 1, "L must be positive");
  const std::size_t cells = ipow(static_cast<std::size_t>(L), t);
  std::vector<char> seen(cells, 0);
  std::vector<CommutantClass> out;
  for (std::size_t c = 0; c < cells; ++c) {
    if (seen[c]) continue;
    const std::vector<int> x = decode(c, t, L);
    std::set<std::vector<int>> members;
    std::vector<int> perm(static_cast<std::size_t>(t));
    for (int r = 0; r < t; ++r) perm[static_cast<std::size_t>(r)] = r;
    do {
      for (unsigned signs = 0; signs < (1u << t); ++signs) {
        std::vector<int> y(static_cast<std::size_t>(t));
        for (int r = 0; r < t; ++r) {
          const int v = x[static_cast<std::size_t>(perm[static_cast<std::size_t>(r)])];
          y[static_cast<std::size_t>(r)] = ((signs >> r) & 1u) ? (L - v) % L : v;
        }
        members.insert(y);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    CommutantClass cls;
    for (const auto& y : members) {
      seen[encode_vec(y, L)] = 1;
      cls.members.push_back(y);
    }
    cls.representative = x;
    for (auto& v : cls.representative) v = std::min(v, L - v);
    std::sort(cls.representative.begin(), cls.representative.end());
    out.push_back(std::move(cls));
  }
  return out;
}

MomentOracle::MomentOracle(int t, int L) : t_(t), L_(L) {
  require(L % 2 == 1, "moment oracle requires odd L");
  require(t >= 1 && t <= 4, "moment oracle supports t <= 4");
  const auto classes = commutant_classes(t, L);
  classes_ = classes.size();
  cells_ = ipow(static_cast<std::size_t>(L), t);
  std::vector<double> cosine(static_cast<std::size_t>(L));
  for (int r = 0; r < L; ++r) cosine[static_cast<std::size_t>(r)] = std::cos(2.0 * std::numbers::pi * r / L);
  F_.assign(classes_ * cells_, 0.0);
  for (std::size_t s = 0; s < classes_; ++s) {
    for (std::size_t c = 0; c < cells_; ++c) {
      const std::vector<int> alpha = decode(c, t, L);
      double acc = 0.0;
      for (const auto& x : classes[s].members) {
        long dot = 0;
        for (int r = 0; r < t; ++r) dot += static_cast<long>(x[static_cast<std::size_t>(r)]) * alpha[static_cast<std::size_t>(r)];
        acc += cosine[static_cast<std::size_t>(dot % L)];
      }
      F_[s * cells_ + c] = acc;
    }
  }
}

std::size_t MomentOracle::encode(const int* x) const {
  std::size_t c = 0;
  for (int r = 0; r < t_; ++r) c = c * static_cast<std::size_t>(L_) + static_cast<std::size_t>(((x[r] % L_) + L_) % L_);
  return c;
}

double MomentOracle::class_sum(const int* alpha, const int* beta) const {
  const std::size_t ca = encode(alpha), cb = encode(beta);
  double acc = 0.0;
  for (std::size_t s = 0; s < classes_; ++s) acc += F_[s * cells_ + ca] * F_[s * cells_ + cb];
  return acc;
}

double MomentOracle::moment(const std::vector<int>& conj_rows, const std::vector<int>& conj_cols,
                            const std::vector<int>& rows, const std::vector<int>& cols) const {
  const auto t = static_cast<std::size_t>(t_);
  require(conj_rows.size() == t && conj_cols.size() == t && rows.size() == t && cols.size() == t,
          "moment index lists must have length t");
  std::vector<int> alpha(t), beta(t);
  for (std::size_t r = 0; r < t; ++r) {
    alpha[r] = conj_rows[r] - conj_cols[r];
    beta[r] = rows[r] - cols[r];
  }
  return class_sum(alpha.data(), beta.data()) / std::pow(static_cast<double>(L_), 2 * t_);
}

long commutant_dimension(int t, int L) {
  require(t == 2, "commutant_dimension is implemented for t = 2");
  require(L % 2 == 1, "commutant_dimension requires odd L");
  auto mod = [L](int v) { return ((v % L) + L) % L; };
  std::set<std::array<int, 4>> ops;
  for (int n = 0; n < L; ++n) {
    for (int m = 0; m < L; ++m) {
      const bool n0 = n != 0, m0 = m != 0, npm = mod(n - m) != 0 && mod(n + m) != 0;
      ops.insert({n, m, n, m});
      if (n0) ops.insert({n, m, mod(-n), m});
      if (m0) ops.insert({n, m, n, mod(-m)});
      if (n0 && m0) ops.insert({n, m, mod(-n), mod(-m)});
      if (npm) ops.insert({n, m, m, n});
      if (npm && n0) ops.insert({n, m, m, mod(-n)});
      if (npm && m0) ops.insert({n, m, mod(-m), n});
      if (npm && n0 && m0) ops.insert({n, m, mod(-m), mod(-n)});
    }
  }
  return static_cast<long>(ops.size());
}

long commutant_family_raw_count(int L) {
  require(L % 2 == 1, "commutant family count requires odd L");
  auto mod = [L](int v) { return ((v % L) + L) % L; };
  long count = 0;
  for (int n = 0; n < L; ++n) {
    for (int m = 0; m < L; ++m) {
      const bool n0 = n != 0, m0 = m != 0, npm = mod(n - m) != 0 && mod(n + m) != 0;
      count += 1 + n0 + m0 + (n0 && m0) + npm + (npm && n0) + (npm && m0) + (npm && n0 && m0);
    }
  }
  return count;
}

}  // namespace fshadow::channel
