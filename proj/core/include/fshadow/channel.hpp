#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fshadow/commutant.hpp"

namespace fshadow::channel {

/// Ordered correlator basis of W_2k: A_s = a^dag_{i1}..a^dag_{ik} a_{j1}..a_{jk}
/// with i1 < .. < ik and j1 < .. < jk. Index s = row(i) * C(L,k) + row(j).
class CorrelatorBasis {
 public:
  CorrelatorBasis(int k, int L);

  int k() const { return k_; }
  int L() const { return L_; }
  std::size_t size() const { return tuples_.size() * tuples_.size(); }
  std::size_t tuple_count() const { return tuples_.size(); }

  const std::vector<int>& creation(std::size_t s) const { return tuples_[s / tuples_.size()]; }
  const std::vector<int>& annihilation(std::size_t s) const { return tuples_[s % tuples_.size()]; }
  const std::vector<int>& tuple(std::size_t r) const { return tuples_[r]; }

  /// Position of a strictly increasing tuple.
  std::size_t tuple_index(const std::vector<int>& sorted) const;
  std::size_t index(const std::vector<int>& creation, const std::vector<int>& annihilation) const;

  /// Canonical form of an arbitrary index pair: sign is the product of the
  /// sorting-permutation parities, 0 when an index repeats.
  struct Canonical {
    int sign = 0;
    std::size_t index = 0;
  };
  Canonical canonical(std::vector<int> creation, std::vector<int> annihilation) const;

 private:
  int k_;
  int L_;
  std::vector<std::vector<int>> tuples_;
  std::vector<std::size_t> lookup_;  // dense L^k table -> tuple position
};

struct Spectrum {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
};

/// Block of the measurement channel on W_2k in the ordered correlator basis.
/// Entry (s, h) is the coefficient of A_h in M(A_s); the matrix is real symmetric.
struct ChannelMatrix {
  int k = 1;
  int L = 0;
  Eigen::MatrixXd entries;

  std::size_t dimension() const { return static_cast<std::size_t>(entries.rows()); }
  const Spectrum& spectrum() const;
  Eigen::Index rank(double tol = 1e-8) const;

 private:
  mutable std::optional<Spectrum> spectrum_;
};

inline constexpr double kDefaultPinvTol = 1e-8;
inline constexpr int kM4MaxL = 11;

/// Closed form of the 2-point block: (1/L)(d_ij d_lm + d_il d_jm - d_{i-j,l-m}/L).
double m2_entry(int i, int j, int l, int m, int L);
ChannelMatrix m2_matrix(int L);

/// Kernel generators sum_i A_{i,i+k}, k = 1..L-1.
std::vector<Eigen::VectorXd> kernel_basis_2pt(int L);
/// {A_ij - A_{L-1, j-i-1} : i != j, i <= L-2} then {A_ii}.
std::vector<Eigen::VectorXd> image_basis_2pt(int L);

struct M4BuildOptions {
  int threads = 1;
  int max_L = kM4MaxL;
};

/// Memoized delta-sum for the fourth-moment class sum, keyed by the folded,
/// sorted difference tuples. Equal to the exact class sum minus kClassSumOffset.
class DeltaSumTable {
 public:
  explicit DeltaSumTable(int L, int threads = 1);

  int L() const { return L_; }
  /// Delta-sum value for raw difference tuples (entries taken mod L).
  double value(const int* alpha, const int* beta) const;
  double value_by_key(std::size_t ka, std::size_t kb) const { return table_[ka * keys_ + kb]; }
  std::size_t key(const int* x) const;
  std::size_t key_count() const { return keys_; }

  /// Direct evaluation of the delta-sum (no memo); used to fill the table.
  static double evaluate(int L, const std::array<int, 4>& a, const std::array<int, 4>& b);

 private:
  int L_;
  std::size_t keys_ = 0;
  std::vector<std::size_t> key_of_code_;  // (h+1)^4 sorted-code -> key
  std::vector<double> table_;
};

/// The delta-sum differs from the class sum by this L-independent constant,
/// which cancels under antisymmetrization.
inline constexpr double kClassSumOffset = 7585.0;

/// Inner quantity M~(i, j, l, m) = sum_{p1,p2} E[ubar_{i1p1} ubar_{i2p2} ubar_{m1p1} ubar_{m2p2}
/// u_{j1p1} u_{j2p2} u_{l1p1} u_{l2p2}] from the delta-sum (up to an additive constant).
double m4_tilde(const DeltaSumTable& table, const std::array<int, 2>& i, const std::array<int, 2>& j,
                const std::array<int, 2>& l, const std::array<int, 2>& m);

/// Antisymmetrized entry sum_{pi,sigma,lambda} sgn M~(i, pi j, sigma l, lambda m).
double m4_entry(const DeltaSumTable& table, const std::array<int, 2>& i, const std::array<int, 2>& j,
                const std::array<int, 2>& l, const std::array<int, 2>& m);

/// Main-text tensor element sum_pi sgn M~(i, pi j, l, m) for unrestricted l, m.
/// Antisymmetrizing it over l and m gives m4_entry.
double m4_main_text_entry(const DeltaSumTable& table, const std::array<int, 2>& i,
                          const std::array<int, 2>& j, const std::array<int, 2>& l,
                          const std::array<int, 2>& m);

ChannelMatrix m4_matrix(int L, const M4BuildOptions& opts = {});

/// sum_{p1,p2} Phi_4(k, m, l, n; p, p, p, p) by class enumeration.
double phi4_oracle(const MomentOracle& oracle, const std::array<int, 2>& k, const std::array<int, 2>& m,
                   const std::array<int, 2>& l, const std::array<int, 2>& n);
double phi4_oracle(int L, const std::array<int, 2>& k, const std::array<int, 2>& m,
                   const std::array<int, 2>& l, const std::array<int, 2>& n);
/// sum_p Phi_2(k, i, l, j; p, p, p, p) by class enumeration.
double phi2_oracle(const MomentOracle& oracle, int k, int i, int l, int j);

/// M^(4) assembled straight from phi4_oracle, no symmetry shortcuts.
ChannelMatrix m4_matrix_oracle(int L);

ChannelMatrix pseudo_inverse(const ChannelMatrix& M, double tol = kDefaultPinvTol);
ChannelMatrix image_projector(const ChannelMatrix& M, double tol = kDefaultPinvTol);

namespace detail {
class M4Assembler;
}

/// Applies M^(4) on L modes without materializing it. Holds only the memo
/// tables; entries are recomputed on every apply.
class M4Operator {
 public:
  explicit M4Operator(int L, int threads = 1);
  ~M4Operator();
  M4Operator(M4Operator&&) noexcept;
  M4Operator& operator=(M4Operator&&) noexcept;

  int L() const { return L_; }
  std::size_t dimension() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  double entry(std::size_t s, std::size_t h) const;
  const CorrelatorBasis& basis() const;

 private:
  int L_;
  int threads_;
  std::unique_ptr<detail::M4Assembler> impl_;
};

Eigen::VectorXd matfree_apply_m4(int L, const Eigen::VectorXd& x);

// ---- cache container ----

inline constexpr int kCacheFormatVersion = 1;

struct CacheHeader {
  int format_version = kCacheFormatVersion;
  std::string kind;  // "channel" or "plan"
  int k = 0;
  int L = 0;
  std::size_t d = 0;
  double tolerance = kDefaultPinvTol;
  std::string checksum;  // FNV-1a 64 of the payload, hex
  std::string metadata;  // JSON text for extra fields
};

std::string fnv1a_hex(const void* data, std::size_t bytes);

void write_container(const std::filesystem::path& path, CacheHeader header, const std::vector<double>& payload);
/// Throws IoError on missing file, bad magic, or checksum mismatch.
std::pair<CacheHeader, std::vector<double>> read_container(const std::filesystem::path& path);

std::filesystem::path channel_cache_path(const std::filesystem::path& dir, int k, int L);
void save_channel(const std::filesystem::path& path, const ChannelMatrix& M, double tol = kDefaultPinvTol);
ChannelMatrix load_channel(const std::filesystem::path& path, CacheHeader* header = nullptr);

}  // namespace fshadow::channel
