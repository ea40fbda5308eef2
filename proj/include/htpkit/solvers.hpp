#pragma once

#include <optional>
#include <vector>

#include "htpkit/core.hpp"

namespace htpkit {

struct HtpConfig {
  Index max_iterations = 1000;
  bool support_stable_stop = true;
  /// Relative to ||b||.
  double residual_tolerance = 1e-10;
  double step_size = 1.0;
  bool record_trace = false;

  /// Throws invalid_argument if any field is out of range.
  void validate() const;
};

struct TraceEntry {
  IndexSet support;
  double residual_norm = 0.0;
};

struct RecoveryOutcome {
  SparseVector estimate;
  IndexSet support;
  Index iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
  std::optional<std::vector<TraceEntry>> trace;
};

/// Hard Thresholding Pursuit: gradient step, keep the s largest entries,
/// least squares on the kept support.
///
/// Stops when the support repeats (S^(n+1) == S^(n)) or the relative
/// residual drops to cfg.residual_tolerance. Otherwise runs to
/// cfg.max_iterations and returns the last iterate with converged = false.
/// Support sequences are deterministic functions of the previous support, so
/// an earlier support reappearing means the iteration is periodic; the
/// iterate at max_iterations is then read off the cycle instead of being
/// recomputed pass by pass.
RecoveryOutcome htp(const DenseMatrix& a, const Vector& b, Index s, const SparseVector& x0,
                    const HtpConfig& cfg = {});

/// Working state of the deflation rounds.
class DeflationState {
 public:
  DeflationState(const DenseMatrix& a, const Vector& b, Index s);

  const Matrix& reduced_matrix() const { return reduced_; }
  const Vector& reduced_rhs() const { return rhs_; }
  Index remaining_sparsity() const { return remaining_; }
  const IndexSet& selected_global() const { return selected_; }
  const IndexSet& global_of_local() const { return global_of_local_; }

  /// Removes local column `local`, records its global index, and projects the
  /// remaining columns and the rhs onto the complement of that column.
  /// Throws degenerate_deflation when the column norm is below 1e-10.
  void select(Index local);

 private:
  Matrix reduced_;
  Vector rhs_;
  Index remaining_;
  IndexSet selected_;
  IndexSet global_of_local_;
};

struct DeflationRound {
  Index local = 0;
  Index global = 0;
  Index inner_iterations = 0;
  bool inner_converged = false;
};

/// One round: renormalized inner HTP (zero start), pick the largest entry,
/// deflate. Columns whose norm has fallen below 1e-10 are left out of the
/// inner problem.
DeflationRound dp_htp_round(DeflationState& state, const HtpConfig& cfg = {});

/// Deflation-and-projection HTP: s rounds of dp_htp_round, then least squares
/// against the original matrix on the s selected columns.
///
/// iterations counts inner HTP iterations summed over rounds; converged is
/// true when every inner HTP converged. The trace, when requested, has one
/// entry per round holding the selected set so far and ||b^(n+1)||.
RecoveryOutcome dp_htp(const DenseMatrix& a, const Vector& b, Index s, const HtpConfig& cfg = {});

/// Orthogonal Matching Pursuit, s rounds (fewer if the residual vanishes).
RecoveryOutcome omp(const DenseMatrix& a, const Vector& b, Index s);

/// Subspace Pursuit. The merged candidate set is capped at m columns so the
/// least-squares step stays well posed when 2s > m.
RecoveryOutcome subspace_pursuit(const DenseMatrix& a, const Vector& b, Index s,
                                 const HtpConfig& cfg = {});

}  // namespace htpkit
