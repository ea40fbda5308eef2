#include "htpkit/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace htpkit {

namespace {

constexpr double kFrozenColumnNorm = 1e-10;

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

void check_problem(const DenseMatrix& a, const Vector& b, Index s) {
  require(b.size() == a.rows(),
          fmt::format("rhs has length {}, matrix has {} rows", b.size(), a.rows()));
  require(s >= 1 && s <= a.rows(),
          fmt::format("sparsity {} outside [1, m = {}]", s, a.rows()));
}

// b - A_S c for coefficients c aligned with `support`.
Vector residual_of(const Matrix& a, const Vector& b, const IndexSet& support, const Vector& coeffs) {
  Vector r = b;
  for (std::size_t k = 0; k < support.size(); ++k) r.noalias() -= coeffs[static_cast<Index>(k)] * a.col(support[k]);
  return r;
}

SparseVector as_sparse(Index n, const IndexSet& support, const Vector& coeffs) {
  return SparseVector(n, support, std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()));
}

Vector coefficients_or_throw(const Matrix& a, const Vector& b, const IndexSet& support, Index iteration) {
  try {
    return detail::least_squares_coefficients(a, b, support);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::singular_submatrix) throw;
    throw Error(ErrorCode::singular_submatrix,
                fmt::format("singular support submatrix at iteration {}", iteration));
  }
}

// Largest |value|, lower index on ties.
std::size_t argmax_magnitude(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (std::abs(values[k]) > std::abs(values[best])) best = k;
  return best;
}

}  // namespace

void HtpConfig::validate() const {
  require(max_iterations >= 1, "max_iterations must be at least 1");
  require(residual_tolerance > 0.0, "residual_tolerance must be positive");
  require(step_size > 0.0, "step_size must be positive");
}

// ---------------------------------------------------------------------------
// HTP

RecoveryOutcome htp(const DenseMatrix& a, const Vector& b, Index s, const SparseVector& x0,
                    const HtpConfig& cfg) {
  cfg.validate();
  check_problem(a, b, s);
  require(a.column_normalized(), "htp requires a matrix with normalized columns");
  require(x0.ambient_dim() == a.cols(), "initial guess has the wrong dimension");
  require(x0.nnz() <= s, "initial guess is not s-sparse");

  const Matrix& am = a.entries();
  const Index n = a.cols();
  const double stop_residual = cfg.residual_tolerance * b.norm();

  IndexSet support = x0.support();
  Vector coeffs = Eigen::Map<const Vector>(x0.values().data(), x0.nnz());
  bool coeffs_are_ls = false;
  Vector r = residual_of(am, b, support, coeffs);
  double r_norm = r.norm();

  RecoveryOutcome out;
  if (cfg.record_trace) out.trace.emplace();
  std::vector<TraceEntry> history;
  std::map<IndexSet, Index> first_seen;

  auto finish = [&](Index iterations, bool converged) {
    out.estimate = as_sparse(n, support, coeffs);
    out.support = support;
    out.iterations = iterations;
    out.converged = converged;
    out.residual_norm = r_norm;
    return out;
  };

  for (Index it = 1; it <= cfg.max_iterations; ++it) {
    Vector u = cfg.step_size * (am.transpose() * r);
    for (std::size_t k = 0; k < support.size(); ++k) u[support[k]] += coeffs[static_cast<Index>(k)];
    IndexSet next = hard_threshold(u, s).support();
    const bool repeated = next == support;

    if (!(repeated && coeffs_are_ls)) {
      coeffs = coefficients_or_throw(am, b, next, it);
      r = residual_of(am, b, next, coeffs);
      r_norm = r.norm();
    }
    support = std::move(next);
    coeffs_are_ls = true;
    history.push_back(TraceEntry{support, r_norm});
    if (out.trace) out.trace->push_back(history.back());

    if (r_norm <= stop_residual) return finish(it, true);
    if (cfg.support_stable_stop && repeated) return finish(it, true);

    if (auto seen = first_seen.find(support); seen != first_seen.end()) {
      // S^(it) == S^(k): period `it - k` from iteration k onward.
      const Index k = seen->second;
      const Index period = it - k;
      const Index last = k + (cfg.max_iterations - k) % period;
      if (out.trace) {
        for (Index j = it + 1; j <= cfg.max_iterations; ++j)
          out.trace->push_back(history[static_cast<std::size_t>(k + (j - k) % period - 1)]);
      }
      support = history[static_cast<std::size_t>(last - 1)].support;
      coeffs = coefficients_or_throw(am, b, support, last);
      r = residual_of(am, b, support, coeffs);
      r_norm = r.norm();
      return finish(cfg.max_iterations, false);
    }
    first_seen.emplace(support, it);
  }
  return finish(cfg.max_iterations, false);
}

// ---------------------------------------------------------------------------
// DP-HTP

DeflationState::DeflationState(const DenseMatrix& a, const Vector& b, Index s)
    : reduced_(a.entries()), rhs_(b), remaining_(s) {
  check_problem(a, b, s);
  global_of_local_.resize(static_cast<std::size_t>(a.cols()));
  for (Index j = 0; j < a.cols(); ++j) global_of_local_[static_cast<std::size_t>(j)] = j;
}

void DeflationState::select(Index local) {
  require(remaining_ > 0, "no sparsity left to spend");
  require(local >= 0 && local < reduced_.cols(), "local column out of range");
  const Vector column = reduced_.col(local);
  if (column.norm() < kFrozenColumnNorm) {
    throw Error(ErrorCode::degenerate_deflation,
                fmt::format("degenerate deflation: projected column {} has norm {:.3g}",
                            global_of_local_[static_cast<std::size_t>(local)], column.norm()));
  }
  const Index cols = reduced_.cols();
  Matrix kept(reduced_.rows(), cols - 1);
  kept.leftCols(local) = reduced_.leftCols(local);
  kept.rightCols(cols - 1 - local) = reduced_.rightCols(cols - 1 - local);
  selected_.push_back(global_of_local_[static_cast<std::size_t>(local)]);
  global_of_local_.erase(global_of_local_.begin() + local);
  detail::project_out(kept, rhs_, column);
  reduced_ = std::move(kept);
  --remaining_;
}

DeflationRound dp_htp_round(DeflationState& state, const HtpConfig& cfg) {
  require(state.remaining_sparsity() > 0, "no sparsity left to spend");
  const Matrix& reduced = state.reduced_matrix();

  IndexSet active;
  for (Index j = 0; j < reduced.cols(); ++j)
    if (reduced.col(j).norm() >= kFrozenColumnNorm) active.push_back(j);
  if (active.empty()) {
    throw Error(ErrorCode::degenerate_deflation, "degenerate deflation: every column is deflated away");
  }
  Matrix inner(reduced.rows(), static_cast<Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    inner.col(static_cast<Index>(k)) = reduced.col(active[k]).normalized();
  }
  const DenseMatrix inner_matrix(std::move(inner));
  const Index inner_cols = inner_matrix.cols();
  const RecoveryOutcome inner_out = htp(inner_matrix, state.reduced_rhs(), state.remaining_sparsity(),
                                        SparseVector::zero(inner_cols), cfg);
  if (inner_out.estimate.is_zero()) {
    throw Error(ErrorCode::empty_inner_estimate, "empty inner estimate");
  }
  const auto pick = argmax_magnitude(inner_out.estimate.values());
  DeflationRound round;
  round.local = active[static_cast<std::size_t>(inner_out.estimate.support()[pick])];
  round.global = state.global_of_local()[static_cast<std::size_t>(round.local)];
  round.inner_iterations = inner_out.iterations;
  round.inner_converged = inner_out.converged;
  state.select(round.local);
  return round;
}

RecoveryOutcome dp_htp(const DenseMatrix& a, const Vector& b, Index s, const HtpConfig& cfg) {
  cfg.validate();
  check_problem(a, b, s);
  require(a.column_normalized(), "dp_htp requires a matrix with normalized columns");

  HtpConfig inner_cfg = cfg;
  inner_cfg.record_trace = false;

  DeflationState state(a, b, s);
  RecoveryOutcome out;
  if (cfg.record_trace) out.trace.emplace();
  bool all_converged = true;
  while (state.remaining_sparsity() > 0) {
    const DeflationRound round = dp_htp_round(state, inner_cfg);
    out.iterations += round.inner_iterations;
    all_converged = all_converged && round.inner_converged;
    if (out.trace) out.trace->push_back(TraceEntry{detail::sorted(state.selected_global()), state.reduced_rhs().norm()});
  }

  out.support = detail::sorted(state.selected_global());
  const Vector coeffs = coefficients_or_throw(a.entries(), b, out.support, out.iterations);
  out.estimate = as_sparse(a.cols(), out.support, coeffs);
  out.residual_norm = residual_of(a.entries(), b, out.support, coeffs).norm();
  out.converged = all_converged;
  return out;
}

// ---------------------------------------------------------------------------
// Baselines

RecoveryOutcome omp(const DenseMatrix& a, const Vector& b, Index s) {
  check_problem(a, b, s);
  const Matrix& am = a.entries();
  const double stop_residual = 1e-10 * b.norm();

  IndexSet selected;
  std::vector<bool> taken(static_cast<std::size_t>(a.cols()), false);
  Vector coeffs(0);
  Vector r = b;
  double r_norm = r.norm();
  Index rounds = 0;

  while (rounds < s && r_norm > stop_residual) {
    const Vector corr = am.transpose() * r;
    Index best = -1;
    for (Index j = 0; j < a.cols(); ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      if (best < 0 || std::abs(corr[j]) > std::abs(corr[best])) best = j;
    }
    if (best < 0 || corr[best] == 0.0) break;
    selected.push_back(best);
    taken[static_cast<std::size_t>(best)] = true;
    ++rounds;
    const IndexSet support = detail::sorted(selected);
    coeffs = coefficients_or_throw(am, b, support, rounds);
    r = residual_of(am, b, support, coeffs);
    r_norm = r.norm();
  }

  RecoveryOutcome out;
  out.support = detail::sorted(selected);
  out.estimate = as_sparse(a.cols(), out.support, coeffs);
  out.iterations = rounds;
  out.converged = true;
  out.residual_norm = r_norm;
  return out;
}

RecoveryOutcome subspace_pursuit(const DenseMatrix& a, const Vector& b, Index s, const HtpConfig& cfg) {
  cfg.validate();
  check_problem(a, b, s);
  const Matrix& am = a.entries();
  const Index n = a.cols();
  const Index m = a.rows();
  const double stop_residual = cfg.residual_tolerance * b.norm();

  IndexSet support = hard_threshold(Vector(am.transpose() * b), s).support();
  Vector coeffs = coefficients_or_throw(am, b, support, 1);
  Vector r = residual_of(am, b, support, coeffs);
  double r_norm = r.norm();

  RecoveryOutcome out;
  if (cfg.record_trace) out.trace.emplace(std::vector<TraceEntry>{{support, r_norm}});
  auto finish = [&](Index iterations, bool converged) {
    out.estimate = as_sparse(n, support, coeffs);
    out.support = support;
    out.iterations = iterations;
    out.converged = converged;
    out.residual_norm = r_norm;
    return out;
  };

  for (Index it = 1;; ++it) {
    if (r_norm <= stop_residual) return finish(it, true);
    if (it >= cfg.max_iterations) return finish(it, false);

    // Merge: current support plus the best-correlated outside columns.
    Vector corr = am.transpose() * r;
    for (Index j : support) corr[j] = 0.0;
    const Index extra = std::min<Index>(s, m - static_cast<Index>(support.size()));
    IndexSet merged = support;
    const SparseVector candidates = hard_threshold(corr, extra);
    merged.insert(merged.end(), candidates.support().begin(), candidates.support().end());
    merged = detail::sorted(std::move(merged));

    // Prune to s by least-squares magnitude.
    const Vector merged_coeffs = coefficients_or_throw(am, b, merged, it + 1);
    Vector spread = Vector::Zero(n);
    for (std::size_t k = 0; k < merged.size(); ++k) spread[merged[k]] = merged_coeffs[static_cast<Index>(k)];
    IndexSet next = hard_threshold(spread, s).support();

    const Vector next_coeffs = coefficients_or_throw(am, b, next, it + 1);
    const Vector next_r = residual_of(am, b, next, next_coeffs);
    const double next_norm = next_r.norm();
    if (next == support || next_norm >= r_norm) return finish(it + 1, true);

    support = std::move(next);
    coeffs = next_coeffs;
    r = next_r;
    r_norm = next_norm;
    if (out.trace) out.trace->push_back(TraceEntry{support, r_norm});
  }
}

}  // namespace htpkit
