#pragma once

// Deliberately naive reference computations for the tests. None of them
// shares code with the library beyond the basic types.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "htpkit/core.hpp"

namespace oracle {

using htpkit::Index;
using htpkit::IndexSet;
using htpkit::Matrix;
using htpkit::Vector;

// All k-subsets of {0..n-1} in lexicographic order, via a selection mask
// permuted with std::prev_permutation.
inline std::vector<IndexSet> all_subsets(Index n, Index k) {
  std::vector<IndexSet> out;
  if (k < 0 || k > n) return out;
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + k, true);
  do {
    IndexSet set;
    for (Index i = 0; i < n; ++i)
      if (mask[static_cast<std::size_t>(i)]) set.push_back(i);
    out.push_back(std::move(set));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

// Best s-term approximation by trying every support; among equal energies
// the lexicographically smallest support wins.
inline Vector hard_threshold(const Vector& v, Index s) {
  const Index n = v.size();
  const Index k = std::min(s, n);
  IndexSet best;
  double best_energy = -1.0;
  for (const IndexSet& set : all_subsets(n, k)) {
    double energy = 0.0;
    for (Index i : set) energy += v[i] * v[i];
    if (energy > best_energy) {
      best_energy = energy;
      best = set;
    }
  }
  Vector out = Vector::Zero(n);
  for (Index i : best) out[i] = v[i];
  return out;
}

inline Matrix columns(const Matrix& a, const IndexSet& set) {
  Matrix out(a.rows(), static_cast<Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) out.col(static_cast<Index>(k)) = a.col(set[k]);
  return out;
}

// Least squares through the SVD pseudo-inverse; returns a dense N-vector.
inline Vector pinv_least_squares(const Matrix& a, const Vector& b, const IndexSet& set) {
  const Matrix sub = columns(a, set);
  Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector coeffs = svd.solve(b);
  Vector out = Vector::Zero(a.cols());
  for (std::size_t k = 0; k < set.size(); ++k) out[set[k]] = coeffs[static_cast<Index>(k)];
  return out;
}

// Mean |<A_i, A_j>| over `pairs` random distinct column pairs.
inline double mean_offdiag_gram(const Matrix& a, int pairs, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, a.cols() - 1);
  double total = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Index i = pick(rng), j = pick(rng);
    while (j == i) j = pick(rng);
    total += std::abs(a.col(i).dot(a.col(j)));
  }
  return total / pairs;
}

// Lower bound on delta_k from random k-sparse unit vectors.
inline double sampled_ric(const Matrix& a, Index k, int samples, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<Index> order(static_cast<std::size_t>(a.cols()));
  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    std::shuffle(order.begin(), order.end(), rng);
    Vector x = Vector::Zero(a.cols());
    for (Index i = 0; i < k; ++i) x[order[static_cast<std::size_t>(i)]] = normal(rng);
    x.normalize();
    worst = std::max(worst, std::abs((a * x).squaredNorm() - 1.0));
  }
  return worst;
}

inline double relative_error(const Vector& estimate, const Vector& truth) {
  return (estimate - truth).norm() / truth.norm();
}

}  // namespace oracle
