#pragma once

#include <array>
#include <vector>

namespace fshadow::channel {

/// Orbit of a tuple in Z_L^t under independent sign flips and permutations.
struct CommutantClass {
  std::vector<int> representative;  // sorted folded entries min(x, L-x)
  std::vector<std::vector<int>> members;
};

/// All classes of Z_L^t, built by explicit sign/permutation closure.
std::vector<CommutantClass> commutant_classes(int t, int L);

/// Exact Haar moments on CU_Sym(L) from the commutant basis:
/// E[prod_r ubar_{a_r,b_r} prod_r u_{c_r,d_r}] = L^{-2t} sum_{x~y} w^{-x.alpha + y.beta},
/// alpha = a - b, beta = c - d. The class sum factorizes as sum_S F_S(alpha) F_S(beta)
/// with F_S real; F is tabulated over Z_L^t.
class MomentOracle {
 public:
  MomentOracle(int t, int L);

  int t() const { return t_; }
  int L() const { return L_; }
  std::size_t class_count() const { return classes_; }

  /// sum_{x~y} w^{-x.alpha + y.beta}
  double class_sum(const int* alpha, const int* beta) const;
  /// The moment itself, with index differences taken mod L.
  double moment(const std::vector<int>& conj_rows, const std::vector<int>& conj_cols,
                const std::vector<int>& rows, const std::vector<int>& cols) const;

 private:
  std::size_t encode(const int* x) const;

  int t_;
  int L_;
  std::size_t classes_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> F_;  // classes_ x cells_
};

/// Counts distinct operators in the eight families of the t = 2 commutant basis.
long commutant_dimension(int t, int L);

/// Same families, without deduplication. Equal to commutant_dimension when the
/// family constraints avoid double counting.
long commutant_family_raw_count(int L);

}  // namespace fshadow::channel
