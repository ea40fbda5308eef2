#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "htpkit/combinations.hpp"
#include "htpkit/core.hpp"

namespace htpkit {

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kExactFitTolerance = 1e-8;

struct ProblemDims {
  Index m = 0;
  Index n = 0;
  Index s = 0;
};

/// Every exact-fit, at-most-s-sparse solution of A z = b found by enumeration.
struct SolutionSet {
  ProblemDims dims;
  double tolerance = kExactFitTolerance;
  std::vector<SparseVector> solutions;
  bool exhausted = false;
  std::uint64_t supports_examined = 0;
  /// Supports skipped because A_T was numerically rank deficient.
  std::uint64_t singular_supports = 0;

  bool unique() const { return solutions.size() == 1; }
  /// Membership under the oracle's distinctness rule.
  bool contains(const SparseVector& x) const;
};

/// Same support and entrywise relative agreement within `rel_tol`.
bool same_solution(const SparseVector& a, const SparseVector& b, double rel_tol = 1e-8);

/// Brute-force l0 oracle: least squares on every support of size min(s, m)
/// (smaller supports embed in larger ones), keeping fits with
/// ||A z - b|| <= tol * ||b||. Solutions come back sorted by support.
SolutionSet solve_l0_exhaustive(const DenseMatrix& a, const Vector& b, Index s,
                                double tol = kExactFitTolerance,
                                const EnumerationBudget& budget = EnumerationBudget::for_uniqueness(),
                                Execution execution = Execution::parallel);

struct RankCondition {
  bool holds = false;
  /// First rank-deficient 2s-column set in lexicographic order.
  std::optional<IndexSet> witness;
};

/// Whether every m x 2s column submatrix has sigma_min > 1e-10 sigma_max.
/// When 2s > m the answer is immediately no, with the first 2s columns as witness.
RankCondition check_2s_rank_condition(const DenseMatrix& a, Index s,
                                      const EnumerationBudget& budget = EnumerationBudget::for_uniqueness(),
                                      Execution execution = Execution::parallel);

struct NonUniqueInstance {
  SparseVector first;
  SparseVector second;
  Vector rhs;
};

/// Splits a kernel vector of A_W (W a rank-deficient column set of size 2s)
/// into two s-sparse signals with identical measurements.
NonUniqueInstance non_unique_instance(const DenseMatrix& a, const IndexSet& witness);

/// For s = m: pads supp(x) to m indices, takes the one-dimensional kernel v of
/// A_T with T = S + {j'}, scales v so that v_j = x_j at the entry of S with
/// the largest |v_j| and returns x - v, which has x_j = 0 and A(x - v) = A x.
SparseVector construct_alternative_solution(const DenseMatrix& a, const SparseVector& x, Index j_prime);

/// Draws x' with supp(x') = S' for which some x'' != x' with supp(x'') in S''
/// has A x' = A x''. Returns nullopt when ker(A_T) is trivial.
std::optional<SparseVector> sample_phi_member(const DenseMatrix& a, const IndexSet& s_prime,
                                              const IndexSet& s_dprime, const RngSpec& rng);

struct PhiReport {
  IndexSet s_prime;
  IndexSet s_dprime;
  Index kernel_dim = 0;
  Index psi_dim = 0;
  Index omega_dim = 0;
  /// 2s - m
  Index bound = 0;
  /// s' + s'' - m for this particular pair.
  Index pair_bound = 0;
  bool phi_empty = true;
  /// psi_dim + omega_dim <= pair_bound <= bound (vacuously true when phi_empty).
  bool bound_holds = true;
};

/// Dimension accounting for the non-uniqueness set of one support pair.
/// `s` is the sparsity level the pair is measured against.
PhiReport phi_dimension_report(const DenseMatrix& a, const IndexSet& s_prime,
                               const IndexSet& s_dprime, Index s);

// Key-value records, one per line, for the command-line front end.
void write_records(std::ostream& out, const SolutionSet& set);
void write_records(std::ostream& out, const RankCondition& rank, Index s);
void write_records(std::ostream& out, const PhiReport& report);

}  // namespace htpkit
