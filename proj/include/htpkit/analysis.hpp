#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htpkit/combinations.hpp"
#include "htpkit/core.hpp"

namespace htpkit {

/// Restricted isometry constant of one order, with the supports that attain
/// the extreme singular values.
struct RicEstimate {
  Index order = 0;
  double delta = 0.0;
  /// Support attaining whichever side of the two-sided bound is larger.
  IndexSet worst_support;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  IndexSet sigma_min_support;
  IndexSet sigma_max_support;
};

/// Exact delta_k by enumerating every k-column submatrix of a
/// column-normalized A. Ties keep the lexicographically first support.
RicEstimate exact_ric(const DenseMatrix& a, Index k,
                      const EnumerationBudget& budget = EnumerationBudget::for_ric(),
                      Execution execution = Execution::parallel);

/// Same enumeration without the unit-column requirement: the smallest delta
/// with (1 - delta)|x|^2 <= |A x|^2 <= (1 + delta)|x|^2 on k-sparse x.
RicEstimate quadratic_form_ric(const DenseMatrix& a, Index k,
                               const EnumerationBudget& budget = EnumerationBudget::for_ric(),
                               Execution execution = Execution::parallel);

/// P A' where A' is A without column `pivot` and P projects onto the
/// orthogonal complement of that column. Columns are not renormalized.
DenseMatrix deflate_matrix(const DenseMatrix& a, Index pivot);

struct InterlacingReport {
  Index order = 0;
  Index pivot = 0;
  /// delta_k of the input.
  double delta_before = 0.0;
  /// delta_{k-1} of the deflated matrix.
  double delta_after = 0.0;
  bool holds = false;
  /// delta_before < 1; otherwise `holds` says nothing about the claim.
  bool hypothesis_met = false;
};

InterlacingReport verify_deflation_interlacing(const DenseMatrix& a, Index k, Index pivot,
                                               const EnumerationBudget& budget = EnumerationBudget::for_ric(),
                                               Execution execution = Execution::parallel);

struct ChainStep {
  Index step = 0;
  Index order = 0;
  /// Pivot as a column position of the matrix deflated in this step.
  Index pivot = 0;
  double delta = 0.0;
  bool holds = false;
};

struct ChainReport {
  Index order = 0;
  /// delta_k of the undeflated matrix, the bound every step is held to.
  double delta_original = 0.0;
  bool hypothesis_met = false;
  std::vector<ChainStep> steps;
  bool holds() const;
};

/// Deflates repeatedly (pivots are positions in the current matrix) and
/// checks delta_{k-n} of the n-times deflated matrix against delta_k.
ChainReport verify_deflation_chain(const DenseMatrix& a, Index k, const IndexSet& pivots,
                                   const EnumerationBudget& budget = EnumerationBudget::for_ric(),
                                   Execution execution = Execution::parallel);

enum class Split { two_way, three_way };

struct ProjectionReport {
  Index leading = 0;
  /// || B^T B - I ||_2
  double delta = 0.0;
  double b2_pb2 = 0.0;
  std::optional<double> b3_pb2;
  /// 1 - delta <= <B2, P B2> <= 1 + delta
  bool interval_holds = false;
  /// |<B3, P B2>| <= delta (true when there is no third block).
  bool cross_bound_holds = false;
  /// delta >= 1: the booleans are reported but carry no content.
  bool vacuous = false;
};

/// B = [B1 | B2] or [B1 | B2 | B3] with single-column B2, B3. P projects onto
/// the orthogonal complement of range(B1). Throws singular_leading_block when
/// B1 is rank deficient.
ProjectionReport check_projection_inner_products(const DenseMatrix& b, Split split);

struct DominanceFactor {
  Index l = 0;
  double gamma = 0.0;
};

/// l = argmax |x_i| (lower index on ties), gamma = |x_l| / ||x without l||,
/// +inf when x is 1-sparse.
DominanceFactor dominance_factor(const SparseVector& x);

/// 2 (1 + delta) / (1 - 2 delta) * tail_ratio.
double gamma_threshold_dp(double delta, double tail_ratio);
/// (delta + sqrt(delta^2 + (1 + delta)^2)) / (1 - 2 delta).
double gamma_threshold_omp(double delta);

/// ||x*_{S* \ (S + l)}|| / ||x*_{S* \ l}||, 0 for a 1-sparse x*.
double tail_ratio(const SparseVector& x_star, const IndexSet& s);

struct DominanceReport {
  Index l = 0;
  double gamma = 0.0;
  double tail_ratio = 0.0;
  /// Absent when delta >= 1/2.
  std::optional<double> threshold_dp;
  std::optional<double> threshold_omp;
  bool satisfied_dp = false;
  bool satisfied_omp = false;
};

DominanceReport dominance_report(const SparseVector& x_star, const IndexSet& s, double delta);

/// Entries of the least-squares fit on S that sit outside supp(x*) against
///   sqrt((1 + delta) / (1 - delta)) * ||x*_{S* \ S}||,
/// an upper bound on their magnitude when delta bounds the RIC of the
/// submatrices involved. The inequality is usually quoted as a lower bound,
/// which does not follow; `note` records the reading used.
struct SelectionBoundAudit {
  double largest_offsupport = 0.0;
  double bound = 0.0;
  bool upper_bound_holds = true;
  std::string note;
};

SelectionBoundAudit audit_offsupport_bound(const DenseMatrix& a, const SparseVector& x_star,
                                           const IndexSet& s, double delta);

}  // namespace htpkit
