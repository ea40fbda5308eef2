#include "htpkit/core.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <fmt/format.h>

namespace htpkit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::degenerate_column: return "degenerate_column";
    case ErrorCode::infeasible_sparsity: return "infeasible_sparsity";
    case ErrorCode::singular_submatrix: return "singular_submatrix";
    case ErrorCode::zero_deflation_column: return "zero_deflation_column";
    case ErrorCode::empty_inner_estimate: return "empty_inner_estimate";
    case ErrorCode::degenerate_deflation: return "degenerate_deflation";
    case ErrorCode::enumeration_too_large: return "enumeration_too_large";
    case ErrorCode::assumption_violation: return "assumption_violation";
    case ErrorCode::zero_column_detected: return "zero_column_detected";
    case ErrorCode::degenerate_sample: return "degenerate_sample";
    case ErrorCode::threshold_undefined: return "threshold_undefined";
    case ErrorCode::zero_signal: return "zero_signal";
    case ErrorCode::singular_leading_block: return "singular_leading_block";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

constexpr double kUnitColumnTolerance = 1e-12;

bool has_unit_columns(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    if (std::abs(m.col(j).norm() - 1.0) > kUnitColumnTolerance) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("matrix must be at least 1x1, got {}x{}", entries_.rows(),
                            entries_.cols()));
  }
  if (!entries_.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "matrix entries must be finite");
  }
  column_normalized_ = has_unit_columns(entries_);
}

DenseMatrix DenseMatrix::with_normalized_columns(Matrix entries) {
  for (Index j = 0; j < entries.cols(); ++j) {
    const double norm = entries.col(j).norm();
    if (!(norm > 0.0)) {
      throw Error(ErrorCode::degenerate_column, fmt::format("degenerate column {}", j));
    }
    entries.col(j) /= norm;
  }
  return DenseMatrix(std::move(entries));
}

Matrix DenseMatrix::columns(std::span<const Index> columns) const {
  Matrix out(rows(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) out.col(static_cast<Index>(k)) = entries_.col(columns[k]);
  return out;
}

// ---------------------------------------------------------------------------
// SparseVector

SparseVector::SparseVector(Index ambient_dim) : ambient_dim_(ambient_dim) {
  if (ambient_dim < 0) throw Error(ErrorCode::invalid_argument, "negative ambient dimension");
}

SparseVector::SparseVector(Index ambient_dim, IndexSet support, std::vector<double> values)
    : ambient_dim_(ambient_dim) {
  if (ambient_dim < 0) throw Error(ErrorCode::invalid_argument, "negative ambient dimension");
  if (support.size() != values.size()) {
    throw Error(ErrorCode::invalid_argument, "support and values differ in length");
  }
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return support[a] < support[b]; });
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Index index = support[order[k]];
    if (index < 0 || index >= ambient_dim) {
      throw Error(ErrorCode::invalid_argument,
                  fmt::format("index {} outside [0, {})", index, ambient_dim));
    }
    if (k > 0 && support[order[k - 1]] == index) {
      throw Error(ErrorCode::invalid_argument, fmt::format("duplicate index {}", index));
    }
    const double value = values[order[k]];
    if (!std::isfinite(value)) throw Error(ErrorCode::invalid_argument, "non-finite value");
    if (value != 0.0) {
      support_.push_back(index);
      values_.push_back(value);
    }
  }
}

SparseVector SparseVector::from_dense(const Vector& dense) {
  SparseVector out(dense.size());
  for (Index i = 0; i < dense.size(); ++i) {
    if (!std::isfinite(dense[i])) throw Error(ErrorCode::invalid_argument, "non-finite value");
    if (dense[i] != 0.0) {
      out.support_.push_back(i);
      out.values_.push_back(dense[i]);
    }
  }
  return out;
}

Vector SparseVector::to_dense() const {
  Vector out = Vector::Zero(ambient_dim_);
  for (std::size_t k = 0; k < support_.size(); ++k) out[support_[k]] = values_[k];
  return out;
}

double SparseVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

double SparseVector::at(Index index) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), index);
  if (it == support_.end() || *it != index) return 0.0;
  return values_[static_cast<std::size_t>(it - support_.begin())];
}

Vector apply(const DenseMatrix& a, const SparseVector& x) {
  if (x.ambient_dim() != a.cols()) {
    throw Error(ErrorCode::invalid_argument, "signal dimension does not match matrix columns");
  }
  Vector out = Vector::Zero(a.rows());
  for (std::size_t k = 0; k < x.support().size(); ++k) {
    out.noalias() += x.values()[k] * a.col(x.support()[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

DenseMatrix generate_gaussian_matrix(Index m, Index n, const RngSpec& rng, bool normalize) {
  if (m < 1 || n < 1) {
    throw Error(ErrorCode::invalid_argument, fmt::format("invalid dimensions {}x{}", m, n));
  }
  Engine engine = rng.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix entries(m, n);
  // Column-major fill: column j depends only on the draws before it.
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) entries(i, j) = normal(engine);
  if (normalize) return DenseMatrix::with_normalized_columns(std::move(entries));
  for (Index j = 0; j < n; ++j) {
    if (entries.col(j).squaredNorm() == 0.0) {
      throw Error(ErrorCode::degenerate_column, fmt::format("degenerate column {}", j));
    }
  }
  return DenseMatrix(std::move(entries));
}

SparseVector generate_sparse_signal(Index n, Index s, const RngSpec& rng) {
  if (s > n) {
    throw Error(ErrorCode::infeasible_sparsity,
                fmt::format("infeasible sparsity: s = {} exceeds N = {}", s, n));
  }
  if (s < 1) throw Error(ErrorCode::invalid_argument, "sparsity must be at least 1");
  Engine engine = rng.engine();
  // Partial Fisher-Yates: the first s slots form a uniform s-subset.
  IndexSet pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index k = 0; k < s; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(engine))]);
  }
  IndexSet support(pool.begin(), pool.begin() + s);
  std::sort(support.begin(), support.end());

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(support.size());
  for (auto& v : values) {
    do {
      v = normal(engine);
    } while (v == 0.0);
  }
  return SparseVector(n, std::move(support), std::move(values));
}

// ---------------------------------------------------------------------------
// Hard thresholding

namespace {

template <typename Magnitude>
IndexSet top_by_magnitude(IndexSet candidates, Index s, Magnitude magnitude) {
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(std::max<Index>(s, 0)),
                                          candidates.size());
  auto before = [&](Index a, Index b) {
    const double ma = magnitude(a);
    const double mb = magnitude(b);
    return ma != mb ? ma > mb : a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), before);
  candidates.resize(keep);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

}  // namespace

SparseVector hard_threshold(const SparseVector& v, Index s) {
  if (s < 0) throw Error(ErrorCode::invalid_argument, "negative sparsity");
  if (v.nnz() <= s) return v;
  IndexSet slots(v.support().size());
  std::iota(slots.begin(), slots.end(), Index{0});
  const auto kept = top_by_magnitude(
      std::move(slots), s, [&](Index k) { return std::abs(v.values()[static_cast<std::size_t>(k)]); });
  IndexSet support;
  std::vector<double> values;
  for (Index k : kept) {
    support.push_back(v.support()[static_cast<std::size_t>(k)]);
    values.push_back(v.values()[static_cast<std::size_t>(k)]);
  }
  return SparseVector(v.ambient_dim(), std::move(support), std::move(values));
}

SparseVector hard_threshold(const Vector& v, Index s) {
  if (s < 0) throw Error(ErrorCode::invalid_argument, "negative sparsity");
  IndexSet nonzero;
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) nonzero.push_back(i);
  const auto kept = top_by_magnitude(std::move(nonzero), s, [&](Index i) { return std::abs(v[i]); });
  std::vector<double> values;
  values.reserve(kept.size());
  for (Index i : kept) values.push_back(v[i]);
  return SparseVector(v.size(), kept, std::move(values));
}

// ---------------------------------------------------------------------------
// Least squares and projection

namespace detail {

IndexSet sorted(IndexSet set) {
  std::sort(set.begin(), set.end());
  return set;
}

Vector least_squares_coefficients(const Matrix& a, const Vector& b, std::span<const Index> support) {
  const auto k = static_cast<Index>(support.size());
  if (b.size() != a.rows()) throw Error(ErrorCode::invalid_argument, "rhs length mismatch");
  if (k == 0) return Vector(0);
  if (k > a.rows()) {
    throw Error(ErrorCode::singular_submatrix,
                fmt::format("singular support submatrix: {} columns exceed {} rows", k, a.rows()));
  }
  Matrix sub(a.rows(), k);
  for (Index c = 0; c < k; ++c) {
    const Index j = support[static_cast<std::size_t>(c)];
    if (j < 0 || j >= a.cols()) throw Error(ErrorCode::invalid_argument, "support index out of range");
    sub.col(c) = a.col(j);
  }
  Eigen::HouseholderQR<Matrix> qr(sub);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  if (!(largest > 0.0) || diag.minCoeff() < kSingularRatio * largest) {
    throw Error(ErrorCode::singular_submatrix, "singular support submatrix");
  }
  return qr.solve(b);
}

void project_out(Matrix& m, Vector& b, const Vector& c) {
  const double cc = c.squaredNorm();
  // Two classical Gram-Schmidt passes; the second removes the component that
  // survives cancellation when a column is nearly parallel to c.
  for (int pass = 0; pass < 2; ++pass) {
    if (m.cols() > 0) {
      const Eigen::RowVectorXd coeffs = (c.transpose() * m) / cc;
      m.noalias() -= c * coeffs;
    }
    b -= c * (c.dot(b) / cc);
  }
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[0] > 0.0)) return 0;
  return (sv.array() > rel_tol * sv[0]).count();
}

Matrix kernel_basis(const Matrix& m, double rel_tol) {
  if (m.cols() == 0) return Matrix(0, 0);
  Eigen::JacobiSVD<Matrix, Eigen::FullPivHouseholderQRPreconditioner> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  if (sv.size() > 0 && sv[0] > 0.0) rank = (sv.array() > rel_tol * sv[0]).count();
  return svd.matrixV().rightCols(m.cols() - rank);
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

SparseVector least_squares_on_support(const DenseMatrix& a, const Vector& b,
                                      std::span<const Index> support) {
  const Vector coeffs = detail::least_squares_coefficients(a.entries(), b, support);
  IndexSet idx(support.begin(), support.end());
  std::vector<double> values(coeffs.data(), coeffs.data() + coeffs.size());
  return SparseVector(a.cols(), std::move(idx), std::move(values));
}

Deflated deflate_against_column(const DenseMatrix& m, const Vector& b, const Vector& c) {
  if (c.size() != m.rows() || b.size() != m.rows()) {
    throw Error(ErrorCode::invalid_argument, "deflation operands differ in length");
  }
  if (c.norm() < 1e-12) throw Error(ErrorCode::zero_deflation_column, "zero deflation column");
  Matrix out = m.entries();
  Vector rhs = b;
  detail::project_out(out, rhs, c);
  return Deflated{DenseMatrix(std::move(out)), std::move(rhs)};
}

}  // namespace htpkit
