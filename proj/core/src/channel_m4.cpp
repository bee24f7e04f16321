#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <thread>

#include "fshadow/channel.hpp"
#include "fshadow/error.hpp"

namespace fshadow::channel {

namespace {

int mod(int v, int L) { return ((v % L) + L) % L; }

// One grouping is a list of group masks over the eight positions
// (bits 0-3: a_1..a_4, bits 4-7: b_1..b_4).
using Grouping = std::vector<std::uint8_t>;

struct Family {
  std::vector<int> parts;
  double (*coefficient)(double L);
  std::vector<Grouping> groupings;
};

void typed_partitions(const std::vector<int>& parts, std::size_t at, unsigned avail,
                      std::vector<std::uint8_t>& acc, std::vector<std::vector<std::uint8_t>>& out) {
  if (at == parts.size()) {
    out.push_back(acc);
    return;
  }
  for (unsigned sub = 0; sub < 16; ++sub) {
    if ((sub & ~avail) || std::popcount(sub) != parts[at]) continue;
    acc.push_back(static_cast<std::uint8_t>(sub));
    typed_partitions(parts, at + 1, avail & ~sub, acc, out);
    acc.pop_back();
  }
}

std::vector<Grouping> make_groupings(const std::vector<int>& parts) {
  std::vector<std::vector<std::uint8_t>> xs;
  std::vector<std::uint8_t> acc;
  typed_partitions(parts, 0, 0xF, acc, xs);
  std::set<Grouping> uniq;
  for (const auto& X : xs)
    for (const auto& Y : xs) {
      Grouping g;
      for (std::size_t r = 0; r < parts.size(); ++r) g.push_back(static_cast<std::uint8_t>(X[r] | (Y[r] << 4)));
      std::sort(g.begin(), g.end());
      uniq.insert(g);
    }
  return {uniq.begin(), uniq.end()};
}

// Grouping families of the fourth-moment delta-sum with their coefficients.
// The A^(2) and A^(4) coefficients are the ones that reproduce the class sum
// up to a constant; see DeltaSumTable.
const std::vector<Family>& families() {
  static const std::vector<Family> fams = [] {
    std::vector<Family> f = {
        {{1, 1, 1, 1}, [](double L) { return L * L * L * L / 16.0; }, {}},
        {{1, 1, 1}, [](double L) { return -L * L * L / 32.0; }, {}},
        {{2, 1, 1}, [](double L) { return -L * L * L / 8.0; }, {}},
        {{2, 1}, [](double L) { return L * L / 16.0; }, {}},
        {{1, 1}, [](double L) { return 9.0 * L * L / 64.0; }, {}},
        {{2, 2}, [](double L) { return L * L / 4.0; }, {}},
        {{2}, [](double L) { return -9.0 * L / 32.0; }, {}},
        {{3, 1}, [](double L) { return L * L; }, {}},
        {{3}, [](double L) { return -L / 2.0; }, {}},
        {{1}, [](double L) { return -193.0 * L / 128.0; }, {}},
        {{4}, [](double L) { return -33.0 * L / 2.0; }, {}},
    };
    for (auto& fam : f) fam.groupings = make_groupings(fam.parts);
    return f;
  }();
  return fams;
}

}  // namespace

double DeltaSumTable::evaluate(int L, const std::array<int, 4>& a, const std::array<int, 4>& b) {
  int v[8];
  for (int r = 0; r < 4; ++r) {
    v[r] = mod(a[static_cast<std::size_t>(r)], L);
    v[4 + r] = mod(b[static_cast<std::size_t>(r)], L);
  }
  const auto& fams = families();
  std::vector<double> counts(fams.size(), 0.0);
  bool zero[256];
  int sums[256];
  // A global sign flip maps every group sum to its negative, so half the
  // sign patterns suffice.
  for (unsigned signs = 0; signs < 128; ++signs) {
    sums[0] = 0;
    zero[0] = true;
    for (unsigned mask = 1; mask < 256; ++mask) {
      const int r = std::countr_zero(mask);
      const int term = ((signs >> r) & 1u) ? L - v[r] : v[r];
      sums[mask] = (sums[mask & (mask - 1)] + term) % L;
      zero[mask] = sums[mask] == 0;
    }
    for (std::size_t f = 0; f < fams.size(); ++f) {
      long hits = 0;
      for (const auto& g : fams[f].groupings) {
        bool ok = true;
        for (auto m : g)
          if (!zero[m]) {
            ok = false;
            break;
          }
        hits += ok;
      }
      counts[f] += 2.0 * static_cast<double>(hits);
    }
  }
  double total = 0.0;
  for (std::size_t f = 0; f < fams.size(); ++f) total += fams[f].coefficient(L) * counts[f];
  return total;
}

DeltaSumTable::DeltaSumTable(int L, int threads) : L_(L) {
  require(L % 2 == 1, "the delta-sum table requires odd L");
  const int h = L / 2, base = h + 1;
  key_of_code_.assign(static_cast<std::size_t>(base * base * base * base), 0);
  std::vector<std::array<int, 4>> reps;
  for (int x0 = 0; x0 <= h; ++x0)
    for (int x1 = x0; x1 <= h; ++x1)
      for (int x2 = x1; x2 <= h; ++x2)
        for (int x3 = x2; x3 <= h; ++x3) {
          key_of_code_[static_cast<std::size_t>(((x0 * base + x1) * base + x2) * base + x3)] = reps.size();
          reps.push_back({x0, x1, x2, x3});
        }
  keys_ = reps.size();
  table_.assign(keys_ * keys_, 0.0);
  const int nthreads = std::max(1, threads);
  auto worker = [&](int lane) {
    for (std::size_t ka = static_cast<std::size_t>(lane); ka < keys_; ka += static_cast<std::size_t>(nthreads))
      for (std::size_t kb = ka; kb < keys_; ++kb) {
        const double val = evaluate(L, reps[ka], reps[kb]);
        table_[ka * keys_ + kb] = val;
        table_[kb * keys_ + ka] = val;
      }
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
}

std::size_t DeltaSumTable::key(const int* x) const {
  int f[4];
  for (int r = 0; r < 4; ++r) {
    const int v = mod(x[r], L_);
    f[r] = std::min(v, L_ - v);
  }
  std::sort(f, f + 4);
  const int base = L_ / 2 + 1;
  return key_of_code_[static_cast<std::size_t>(((f[0] * base + f[1]) * base + f[2]) * base + f[3])];
}

double DeltaSumTable::value(const int* alpha, const int* beta) const {
  return table_[key(alpha) * keys_ + key(beta)];
}

double m4_tilde(const DeltaSumTable& table, const std::array<int, 2>& i, const std::array<int, 2>& j,
                const std::array<int, 2>& l, const std::array<int, 2>& m) {
  const int L = table.L();
  double acc = 0.0;
  for (int p1 = 0; p1 < L; ++p1)
    for (int p2 = 0; p2 < L; ++p2) {
      const int a[4] = {p1 - i[0], p2 - i[1], p1 - m[0], p2 - m[1]};
      const int b[4] = {j[0] - p1, j[1] - p2, l[0] - p1, l[1] - p2};
      acc += table.value(a, b);
    }
  return acc / std::pow(static_cast<double>(L), 8);
}

double m4_entry(const DeltaSumTable& table, const std::array<int, 2>& i, const std::array<int, 2>& j,
                const std::array<int, 2>& l, const std::array<int, 2>& m) {
  double acc = 0.0;
  for (int pi = 0; pi < 2; ++pi)
    for (int sg = 0; sg < 2; ++sg)
      for (int lm = 0; lm < 2; ++lm) {
        const std::array<int, 2> jj = pi ? std::array<int, 2>{j[1], j[0]} : j;
        const std::array<int, 2> ll = sg ? std::array<int, 2>{l[1], l[0]} : l;
        const std::array<int, 2> mm = lm ? std::array<int, 2>{m[1], m[0]} : m;
        const int sign = ((pi + sg + lm) % 2) ? -1 : 1;
        acc += sign * m4_tilde(table, i, jj, ll, mm);
      }
  return acc;
}

double m4_main_text_entry(const DeltaSumTable& table, const std::array<int, 2>& i,
                          const std::array<int, 2>& j, const std::array<int, 2>& l,
                          const std::array<int, 2>& m) {
  return m4_tilde(table, i, j, l, m) - m4_tilde(table, i, {j[1], j[0]}, l, m);
}

// ---- fast assembly ----

namespace detail {

// Precomputed memo keys for every (index pair, summation point) combination.
class M4Assembler {
 public:
  M4Assembler(int modes, int threads) : table_(modes, threads), basis_(2, modes), L_(modes) {
    const auto& table = table_;
    const auto& basis = basis_;
    const auto L = static_cast<std::size_t>(L_);
    const std::size_t P = L * L;
    akey_.resize(basis.tuple_count() * P * P);
    for (std::size_t it = 0; it < basis.tuple_count(); ++it) {
      const auto& i = basis.tuple(it);
      for (int m1 = 0; m1 < L_; ++m1)
        for (int m2 = 0; m2 < L_; ++m2)
          for (int p = 0; p < L_; ++p)
            for (int q = 0; q < L_; ++q) {
              const int a[4] = {p - i[0], q - i[1], p - m1, q - m2};
              akey_[((it * P + static_cast<std::size_t>(m1 * L_ + m2)) * L + static_cast<std::size_t>(p)) * L +
                    static_cast<std::size_t>(q)] = static_cast<std::uint32_t>(table.key(a));
            }
    }
    bkey_.resize(P * P * P);
    for (int j1 = 0; j1 < L_; ++j1)
      for (int j2 = 0; j2 < L_; ++j2)
        for (int l1 = 0; l1 < L_; ++l1)
          for (int l2 = 0; l2 < L_; ++l2)
            for (int p = 0; p < L_; ++p)
              for (int q = 0; q < L_; ++q) {
                const int b[4] = {j1 - p, j2 - q, l1 - p, l2 - q};
                bkey_[((static_cast<std::size_t>(j1 * L_ + j2) * P + static_cast<std::size_t>(l1 * L_ + l2)) * L +
                       static_cast<std::size_t>(p)) * L + static_cast<std::size_t>(q)] =
                    static_cast<std::uint32_t>(table.key(b));
              }
    scale_ = 1.0 / std::pow(static_cast<double>(L_), 8);
  }

  double entry(std::size_t s, std::size_t h) const {
    const auto L = static_cast<std::size_t>(L_);
    const std::size_t P = L * L;
    const std::size_t it = s / basis_.tuple_count();
    const auto& j = basis_.annihilation(s);
    const auto& l = basis_.creation(h);
    const auto& m = basis_.annihilation(h);
    const std::size_t mv[2] = {static_cast<std::size_t>(m[0] * L_ + m[1]), static_cast<std::size_t>(m[1] * L_ + m[0])};
    const std::size_t jv[2] = {static_cast<std::size_t>(j[0] * L_ + j[1]), static_cast<std::size_t>(j[1] * L_ + j[0])};
    const std::size_t lv[2] = {static_cast<std::size_t>(l[0] * L_ + l[1]), static_cast<std::size_t>(l[1] * L_ + l[0])};
    const std::uint32_t* A[2] = {&akey_[(it * P + mv[0]) * P], &akey_[(it * P + mv[1]) * P]};
    const std::uint32_t* B[2][2];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) B[a][b] = &bkey_[(jv[a] * P + lv[b]) * P];
    double acc = 0.0;
    for (std::size_t pq = 0; pq < P; ++pq) {
      double inner = 0.0;
      for (int lm = 0; lm < 2; ++lm) {
        const std::size_t ka = A[lm][pq];
        const double sl = lm ? -1.0 : 1.0;
        inner += sl * (table_.value_by_key(ka, B[0][0][pq]) - table_.value_by_key(ka, B[0][1][pq]) -
                       table_.value_by_key(ka, B[1][0][pq]) + table_.value_by_key(ka, B[1][1][pq]));
      }
      acc += inner;
    }
    return acc * scale_;
  }

 const CorrelatorBasis& basis() const { return basis_; }
  const DeltaSumTable& table() const { return table_; }

 private:
  DeltaSumTable table_;
  CorrelatorBasis basis_;
  int L_;
  double scale_ = 1.0;
  std::vector<std::uint32_t> akey_;
  std::vector<std::uint32_t> bkey_;
};

}  // namespace detail

namespace {

template <class Fn>
void parallel_rows(std::size_t rows, int threads, Fn&& fn) {
  const int n = std::max(1, threads);
  if (n == 1) {
    for (std::size_t r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t r = static_cast<std::size_t>(t); r < rows; r += static_cast<std::size_t>(n)) fn(r);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

ChannelMatrix m4_matrix(int L, const M4BuildOptions& opts) {
  require(L % 2 == 1, "m4_matrix requires odd L");
  require(L >= 3, "m4_matrix requires L >= 3");
  if (L > opts.max_L)
    throw CostGuardError("m4_matrix: L = " + std::to_string(L) + " exceeds the cost guard " +
                         std::to_string(opts.max_L));
  const detail::M4Assembler asm4(L, opts.threads);
  const CorrelatorBasis& basis = asm4.basis();
  const std::size_t d = basis.size();
  ChannelMatrix M;
  M.k = 2;
  M.L = L;
  M.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));

  // Rows with i1 = 0 are computed; the rest follow from translation invariance.
  std::vector<std::size_t> seed_rows;
  for (std::size_t s = 0; s < d; ++s)
    if (basis.creation(s)[0] == 0) seed_rows.push_back(s);
  parallel_rows(seed_rows.size(), opts.threads, [&](std::size_t r) {
    const std::size_t s = seed_rows[r];
    for (std::size_t h = 0; h < d; ++h) M.entries(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(h)) = asm4.entry(s, h);
  });

  auto shifted = [&](std::size_t s, int t, int& sign) {
    const auto& c = basis.creation(s);
    const auto& a = basis.annihilation(s);
    const auto canon = basis.canonical({mod(c[0] - t, L), mod(c[1] - t, L)}, {mod(a[0] - t, L), mod(a[1] - t, L)});
    sign = canon.sign;
    return canon.index;
  };
  for (std::size_t s = 0; s < d; ++s) {
    const int t = basis.creation(s)[0];
    if (t == 0) continue;
    int srow = 0;
    const std::size_t s0 = shifted(s, t, srow);
    for (std::size_t h = 0; h < d; ++h) {
      int scol = 0;
      const std::size_t h0 = shifted(h, t, scol);
      M.entries(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(h)) =
          srow * scol * M.entries(static_cast<Eigen::Index>(s0), static_cast<Eigen::Index>(h0));
    }
  }
  return M;
}

double phi4_oracle(const MomentOracle& oracle, const std::array<int, 2>& k, const std::array<int, 2>& m,
                   const std::array<int, 2>& l, const std::array<int, 2>& n) {
  require(oracle.t() == 4, "phi4_oracle needs a t = 4 oracle");
  const int L = oracle.L();
  double acc = 0.0;
  for (int p1 = 0; p1 < L; ++p1)
    for (int p2 = 0; p2 < L; ++p2) {
      const int alpha[4] = {k[0] - p1, k[1] - p2, m[0] - p1, m[1] - p2};
      const int beta[4] = {l[0] - p1, l[1] - p2, n[0] - p1, n[1] - p2};
      acc += oracle.class_sum(alpha, beta);
    }
  return acc / std::pow(static_cast<double>(L), 8);
}

double phi4_oracle(int L, const std::array<int, 2>& k, const std::array<int, 2>& m,
                   const std::array<int, 2>& l, const std::array<int, 2>& n) {
  if (L > 7) throw CostGuardError("phi4_oracle: enumeration is limited to L <= 7");
  const MomentOracle oracle(4, L);
  return phi4_oracle(oracle, k, m, l, n);
}

double phi2_oracle(const MomentOracle& oracle, int k, int i, int l, int j) {
  require(oracle.t() == 2, "phi2_oracle needs a t = 2 oracle");
  const int L = oracle.L();
  double acc = 0.0;
  for (int p = 0; p < L; ++p) {
    const int alpha[2] = {k - p, i - p};
    const int beta[2] = {l - p, j - p};
    acc += oracle.class_sum(alpha, beta);
  }
  return acc / std::pow(static_cast<double>(L), 4);
}

ChannelMatrix m4_matrix_oracle(int L) {
  require(L % 2 == 1, "m4_matrix_oracle requires odd L");
  if (L > 7) throw CostGuardError("m4_matrix_oracle: enumeration is limited to L <= 7");
  const MomentOracle oracle(4, L);
  const CorrelatorBasis basis(2, L);
  const auto d = static_cast<Eigen::Index>(basis.size());
  ChannelMatrix M;
  M.k = 2;
  M.L = L;
  M.entries.resize(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    const auto& ci = basis.creation(s);
    const auto& cj = basis.annihilation(s);
    for (Eigen::Index h = 0; h < d; ++h) {
      const auto& cl = basis.creation(h);
      const auto& cm = basis.annihilation(h);
      double acc = 0.0;
      for (int pi = 0; pi < 2; ++pi)
        for (int sg = 0; sg < 2; ++sg)
          for (int lm = 0; lm < 2; ++lm) {
            const std::array<int, 2> i{ci[0], ci[1]};
            const std::array<int, 2> j = pi ? std::array<int, 2>{cj[1], cj[0]} : std::array<int, 2>{cj[0], cj[1]};
            const std::array<int, 2> m = sg ? std::array<int, 2>{cm[1], cm[0]} : std::array<int, 2>{cm[0], cm[1]};
            const std::array<int, 2> l = lm ? std::array<int, 2>{cl[1], cl[0]} : std::array<int, 2>{cl[0], cl[1]};
            acc += (((pi + sg + lm) % 2) ? -1.0 : 1.0) * phi4_oracle(oracle, i, m, j, l);
          }
      M.entries(s, h) = acc;
    }
  }
  return M;
}

M4Operator::M4Operator(int L, int threads) : L_(L), threads_(threads) {
  require(L % 2 == 1, "M4Operator requires odd L");
  require(L >= 3, "M4Operator requires L >= 3");
  impl_ = std::make_unique<detail::M4Assembler>(L, threads);
}

M4Operator::~M4Operator() = default;
M4Operator::M4Operator(M4Operator&&) noexcept = default;
M4Operator& M4Operator::operator=(M4Operator&&) noexcept = default;

std::size_t M4Operator::dimension() const { return impl_->basis().size(); }

const CorrelatorBasis& M4Operator::basis() const { return impl_->basis(); }

double M4Operator::entry(std::size_t s, std::size_t h) const { return impl_->entry(s, h); }

Eigen::VectorXd M4Operator::apply(const Eigen::VectorXd& x) const {
  const std::size_t d = impl_->basis().size();
  require(static_cast<std::size_t>(x.size()) == d, "vector length must equal C(L,2)^2");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  std::vector<std::size_t> support;
  for (std::size_t h = 0; h < d; ++h)
    if (x(static_cast<Eigen::Index>(h)) != 0.0) support.push_back(h);
  parallel_rows(d, threads_, [&](std::size_t s) {
    double acc = 0.0;
    for (auto h : support) acc += impl_->entry(s, h) * x(static_cast<Eigen::Index>(h));
    y(static_cast<Eigen::Index>(s)) = acc;
  });
  return y;
}

Eigen::VectorXd matfree_apply_m4(int L, const Eigen::VectorXd& x) {
  const M4Operator op(L);
  return op.apply(x);
}

}  // namespace fshadow::channel
