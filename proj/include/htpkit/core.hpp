#pragma once

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

#include "htpkit/error.hpp"
#include "htpkit/rng.hpp"

namespace htpkit {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<Index>;

/// Real m x N sensing matrix. Entries are finite; the column_normalized flag is
/// set whenever every column has unit Euclidean norm to within 1e-12.
class DenseMatrix {
 public:
  explicit DenseMatrix(Matrix entries);

  /// Divides every column by its norm. Throws degenerate_column on a zero column.
  static DenseMatrix with_normalized_columns(Matrix entries);

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  bool column_normalized() const { return column_normalized_; }

  const Matrix& entries() const { return entries_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }
  auto col(Index j) const { return entries_.col(j); }

  /// Columns listed in `columns`, in that order.
  Matrix columns(std::span<const Index> columns) const;

  bool operator==(const DenseMatrix& other) const { return entries_ == other.entries_; }

 private:
  Matrix entries_;
  bool column_normalized_ = false;
};

/// Canonical sparse vector: strictly increasing support, no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(Index ambient_dim);
  /// Sorts the pairs and drops explicit zeros. Throws on duplicate or
  /// out-of-range indices.
  SparseVector(Index ambient_dim, IndexSet support, std::vector<double> values);

  static SparseVector from_dense(const Vector& dense);
  static SparseVector zero(Index ambient_dim) { return SparseVector(ambient_dim); }

  Vector to_dense() const;

  Index ambient_dim() const { return ambient_dim_; }
  const IndexSet& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  Index nnz() const { return static_cast<Index>(support_.size()); }
  bool is_zero() const { return support_.empty(); }
  double norm() const;

  /// Value at `index` (0 when off-support).
  double at(Index index) const;

  bool operator==(const SparseVector&) const = default;

 private:
  Index ambient_dim_ = 0;
  IndexSet support_;
  std::vector<double> values_;
};

/// A . x for a sparse x.
Vector apply(const DenseMatrix& a, const SparseVector& x);

/// i.i.d. standard normal entries; optionally normalized column by column.
DenseMatrix generate_gaussian_matrix(Index m, Index n, const RngSpec& rng, bool normalize);

/// Uniform random s-subset support with i.i.d. standard normal values.
SparseVector generate_sparse_signal(Index n, Index s, const RngSpec& rng);

/// Keeps the s largest magnitudes. Ties keep the lower index.
SparseVector hard_threshold(const SparseVector& v, Index s);
SparseVector hard_threshold(const Vector& v, Index s);

/// argmin ||b - A z|| over supp(z) in `support`, via Householder QR of A_S.
/// Throws singular_submatrix when A_S is numerically rank deficient
/// (pivot ratio below 1e-12).
SparseVector least_squares_on_support(const DenseMatrix& a, const Vector& b,
                                      std::span<const Index> support);

namespace detail {
/// Coefficients on `support` (same order) for raw Eigen input; empty support
/// yields an empty vector.
Vector least_squares_coefficients(const Matrix& a, const Vector& b,
                                  std::span<const Index> support);

/// In-place projection of every column of `m` and of `b` onto span{c}^perp.
void project_out(Matrix& m, Vector& b, const Vector& c);

IndexSet sorted(IndexSet set);

/// Number of singular values above rel_tol * sigma_max.
Index numerical_rank(const Matrix& m, double rel_tol);

/// Orthonormal basis (columns) of the numerical null space of `m`.
Matrix kernel_basis(const Matrix& m, double rel_tol);

/// Sorted set operations on strictly increasing index lists.
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
}  // namespace detail

struct Deflated {
  DenseMatrix matrix;
  Vector rhs;
};

/// Returns (P M, P b) with P = I - c c^T / (c^T c), applied without forming P.
/// Throws zero_deflation_column when ||c|| < 1e-12.
Deflated deflate_against_column(const DenseMatrix& m, const Vector& b, const Vector& c);

inline constexpr double kSingularRatio = 1e-12;

}  // namespace htpkit
