#include "htpkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "htpkit/parallel.hpp"

namespace htpkit {

namespace {

constexpr double kSlack = 1e-10;

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

struct Extremes {
  double lambda_min = std::numeric_limits<double>::infinity();
  double lambda_max = -std::numeric_limits<double>::infinity();
  IndexSet min_support;
  IndexSet max_support;
};

// Enumerates Gram eigenvalues of every k-column submatrix. Strict comparisons
// plus rank-ordered merging keep the lexicographically first extremizer.
RicEstimate enumerate_ric(const DenseMatrix& a, Index k, const EnumerationBudget& budget,
                          Execution execution) {
  require(k >= 1, "RIC order must be at least 1");
  require(k <= a.rows() && k <= a.cols(), fmt::format("RIC order {} exceeds matrix dimensions", k));
  budget.check(a.cols(), k, k);

  const Matrix gram = a.entries().transpose() * a.entries();
  auto visit = [&](Extremes& partial, const IndexSet& cols) {
    Matrix sub(k, k);
    for (Index r = 0; r < k; ++r)
      for (Index c = 0; c < k; ++c) sub(r, c) = gram(cols[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub, Eigen::EigenvaluesOnly);
    const double lo = std::max(0.0, eig.eigenvalues()[0]);
    const double hi = eig.eigenvalues()[k - 1];
    if (lo < partial.lambda_min) {
      partial.lambda_min = lo;
      partial.min_support = cols;
    }
    if (hi > partial.lambda_max) {
      partial.lambda_max = hi;
      partial.max_support = cols;
    }
  };
  auto merge = [](Extremes& into, Extremes&& from) {
    if (from.lambda_min < into.lambda_min) {
      into.lambda_min = from.lambda_min;
      into.min_support = std::move(from.min_support);
    }
    if (from.lambda_max > into.lambda_max) {
      into.lambda_max = from.lambda_max;
      into.max_support = std::move(from.max_support);
    }
  };
  Extremes ext =
      detail::reduce_combinations(Combinations(a.cols(), k), execution, Extremes{}, visit, merge);

  RicEstimate out;
  out.order = k;
  out.sigma_min = std::sqrt(ext.lambda_min);
  out.sigma_max = std::sqrt(ext.lambda_max);
  const double lower = 1.0 - out.sigma_min * out.sigma_min;
  const double upper = out.sigma_max * out.sigma_max - 1.0;
  out.delta = std::max({lower, upper, 0.0});
  out.worst_support = lower >= upper ? ext.min_support : ext.max_support;
  out.sigma_min_support = std::move(ext.min_support);
  out.sigma_max_support = std::move(ext.max_support);
  return out;
}

}  // namespace

RicEstimate exact_ric(const DenseMatrix& a, Index k, const EnumerationBudget& budget, Execution execution) {
  if (!a.column_normalized()) {
    throw Error(ErrorCode::invalid_argument, "exact_ric needs unit-norm columns");
  }
  return enumerate_ric(a, k, budget, execution);
}

RicEstimate quadratic_form_ric(const DenseMatrix& a, Index k, const EnumerationBudget& budget,
                               Execution execution) {
  return enumerate_ric(a, k, budget, execution);
}

DenseMatrix deflate_matrix(const DenseMatrix& a, Index pivot) {
  require(pivot >= 0 && pivot < a.cols(), fmt::format("pivot {} out of range", pivot));
  require(a.cols() >= 2, "cannot deflate a single-column matrix");
  IndexSet rest;
  for (Index j = 0; j < a.cols(); ++j)
    if (j != pivot) rest.push_back(j);
  const DenseMatrix others(a.columns(rest));
  return deflate_against_column(others, Vector::Zero(a.rows()), a.col(pivot)).matrix;
}

InterlacingReport verify_deflation_interlacing(const DenseMatrix& a, Index k, Index pivot,
                                               const EnumerationBudget& budget, Execution execution) {
  require(k >= 2, "interlacing needs k >= 2");
  InterlacingReport report;
  report.order = k;
  report.pivot = pivot;
  report.delta_before = quadratic_form_ric(a, k, budget, execution).delta;
  report.delta_after = quadratic_form_ric(deflate_matrix(a, pivot), k - 1, budget, execution).delta;
  report.hypothesis_met = report.delta_before < 1.0;
  report.holds = report.delta_after <= report.delta_before + kSlack;
  return report;
}

bool ChainReport::holds() const {
  return std::all_of(steps.begin(), steps.end(), [](const ChainStep& step) { return step.holds; });
}

ChainReport verify_deflation_chain(const DenseMatrix& a, Index k, const IndexSet& pivots,
                                   const EnumerationBudget& budget, Execution execution) {
  require(!pivots.empty(), "chain needs at least one pivot");
  require(static_cast<Index>(pivots.size()) < k, "chain length must stay below k");
  ChainReport report;
  report.order = k;
  report.delta_original = quadratic_form_ric(a, k, budget, execution).delta;
  report.hypothesis_met = report.delta_original < 1.0;

  DenseMatrix current = a;
  for (std::size_t n = 0; n < pivots.size(); ++n) {
    current = deflate_matrix(current, pivots[n]);
    ChainStep step;
    step.step = static_cast<Index>(n + 1);
    step.order = k - step.step;
    step.pivot = pivots[n];
    step.delta = quadratic_form_ric(current, step.order, budget, execution).delta;
    step.holds = step.delta <= report.delta_original + kSlack;
    report.steps.push_back(step);
  }
  return report;
}

ProjectionReport check_projection_inner_products(const DenseMatrix& b, Split split) {
  const Index extra = split == Split::two_way ? 1 : 2;
  const Index leading = b.cols() - extra;
  require(leading >= 1, "leading block needs at least one column");
  require(b.rows() >= b.cols(), "B needs at least as many rows as columns");

  ProjectionReport report;
  report.leading = leading;
  const Matrix& entries = b.entries();
  const Matrix deviation = entries.transpose() * entries - Matrix::Identity(b.cols(), b.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(deviation, Eigen::EigenvaluesOnly);
  report.delta = eig.eigenvalues().cwiseAbs().maxCoeff();

  const Matrix b1 = entries.leftCols(leading);
  Eigen::JacobiSVD<Matrix> svd(b1);
  const auto& sv = svd.singularValues();
  if (!(sv[sv.size() - 1] > kSlack * sv[0])) {
    throw Error(ErrorCode::singular_leading_block, "singular B_1: leading block is rank deficient");
  }
  Eigen::HouseholderQR<Matrix> qr(b1);
  const Matrix q = qr.householderQ() * Matrix::Identity(b.rows(), leading);

  const Vector b2 = entries.col(leading);
  const Vector pb2 = b2 - q * (q.transpose() * b2);
  report.b2_pb2 = b2.dot(pb2);
  report.interval_holds =
      1.0 - report.delta <= report.b2_pb2 + kSlack && report.b2_pb2 <= 1.0 + report.delta + kSlack;
  report.cross_bound_holds = true;
  if (split == Split::three_way) {
    report.b3_pb2 = entries.col(leading + 1).dot(pb2);
    report.cross_bound_holds = std::abs(*report.b3_pb2) <= report.delta + kSlack;
  }
  report.vacuous = report.delta >= 1.0;
  return report;
}

DominanceFactor dominance_factor(const SparseVector& x) {
  if (x.is_zero()) throw Error(ErrorCode::zero_signal, "zero signal");
  const auto& values = x.values();
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (std::abs(values[k]) > std::abs(values[best])) best = k;
  double rest = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (k != best) rest += values[k] * values[k];
  rest = std::sqrt(rest);
  const double gamma = rest == 0.0 ? std::numeric_limits<double>::infinity() : std::abs(values[best]) / rest;
  return {x.support()[best], gamma};
}

double gamma_threshold_dp(double delta, double tail) {
  require(delta >= 0.0, "delta must be nonnegative");
  require(tail >= 0.0 && tail <= 1.0, "tail ratio must lie in [0, 1]");
  if (delta >= 0.5) throw Error(ErrorCode::threshold_undefined, fmt::format("threshold undefined for delta = {}", delta));
  return 2.0 * (1.0 + delta) / (1.0 - 2.0 * delta) * tail;
}

double gamma_threshold_omp(double delta) {
  require(delta >= 0.0, "delta must be nonnegative");
  if (delta >= 0.5) throw Error(ErrorCode::threshold_undefined, fmt::format("threshold undefined for delta = {}", delta));
  return (delta + std::sqrt(delta * delta + (1.0 + delta) * (1.0 + delta))) / (1.0 - 2.0 * delta);
}

double tail_ratio(const SparseVector& x_star, const IndexSet& s) {
  const Index l = dominance_factor(x_star).l;
  IndexSet covered = detail::sorted(s);
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
  double outside = 0.0;
  double all = 0.0;
  for (std::size_t k = 0; k < x_star.support().size(); ++k) {
    const Index j = x_star.support()[k];
    if (j == l) continue;
    const double v2 = x_star.values()[k] * x_star.values()[k];
    all += v2;
    if (!std::binary_search(covered.begin(), covered.end(), j)) outside += v2;
  }
  if (all == 0.0) return 0.0;
  return std::sqrt(outside) / std::sqrt(all);
}

DominanceReport dominance_report(const SparseVector& x_star, const IndexSet& s, double delta) {
  const DominanceFactor factor = dominance_factor(x_star);
  DominanceReport report;
  report.l = factor.l;
  report.gamma = factor.gamma;
  report.tail_ratio = tail_ratio(x_star, s);
  if (delta >= 0.0 && delta < 0.5) {
    report.threshold_dp = gamma_threshold_dp(delta, report.tail_ratio);
    report.threshold_omp = gamma_threshold_omp(delta);
    report.satisfied_dp = report.gamma > *report.threshold_dp;
    report.satisfied_omp = report.gamma > *report.threshold_omp;
  }
  return report;
}

SelectionBoundAudit audit_offsupport_bound(const DenseMatrix& a, const SparseVector& x_star,
                                           const IndexSet& s, double delta) {
  require(x_star.ambient_dim() == a.cols(), "signal dimension does not match matrix columns");
  require(delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
  const IndexSet support = detail::sorted(s);
  const Vector b = apply(a, x_star);
  const Vector fit = detail::least_squares_coefficients(a.entries(), b, support);

  SelectionBoundAudit audit;
  for (std::size_t k = 0; k < support.size(); ++k)
    if (x_star.at(support[k]) == 0.0)
      audit.largest_offsupport = std::max(audit.largest_offsupport, std::abs(fit[static_cast<Index>(k)]));

  double missed = 0.0;
  for (std::size_t k = 0; k < x_star.support().size(); ++k)
    if (!std::binary_search(support.begin(), support.end(), x_star.support()[k]))
      missed += x_star.values()[k] * x_star.values()[k];
  audit.bound = std::sqrt((1.0 + delta) / (1.0 - delta)) * std::sqrt(missed);
  audit.upper_bound_holds = audit.largest_offsupport <= audit.bound + kSlack * std::max(1.0, audit.bound);
  audit.note = "off-support entries checked against an upper bound; the lower-bound form is not implied";
  return audit;
}

}  // namespace htpkit
