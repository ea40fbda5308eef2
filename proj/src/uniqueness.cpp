#include "htpkit/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "htpkit/fixture_io.hpp"
#include "htpkit/parallel.hpp"

namespace htpkit {

namespace {

// Entries this far below the largest are treated as zeros that least squares
// failed to hit exactly (a smaller support embedded in a larger one).
constexpr double kChopRatio = 1e-10;

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

void require_index_set(const IndexSet& set, Index n, const char* name) {
  for (std::size_t k = 0; k < set.size(); ++k) {
    require(set[k] >= 0 && set[k] < n, fmt::format("{} has index {} outside [0, {})", name, set[k], n));
    require(k == 0 || set[k - 1] < set[k], fmt::format("{} must be strictly increasing", name));
  }
}

// Least squares restricted to `support`; nullopt when A_T is rank deficient.
std::optional<Vector> fit_on_support(const Matrix& a, const Vector& b, const IndexSet& support) {
  if (support.empty()) return Vector(0);
  Matrix sub(a.rows(), static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(support[k]);
  Eigen::ColPivHouseholderQR<Matrix> qr(sub);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < sub.cols()) return std::nullopt;
  return Vector(qr.solve(b));
}

double fit_residual(const Matrix& a, const Vector& b, const IndexSet& support, const Vector& z) {
  Vector r = b;
  for (std::size_t k = 0; k < support.size(); ++k) r.noalias() -= z[static_cast<Index>(k)] * a.col(support[k]);
  return r.norm();
}

bool solution_less(const SparseVector& a, const SparseVector& b) {
  if (a.support() != b.support()) return a.support() < b.support();
  return a.values() < b.values();
}

struct OraclePartial {
  // Distinct solutions never share a support unless their values differ, so
  // bucketing by support keeps the duplicate check local.
  std::map<IndexSet, std::vector<SparseVector>> by_support;
  std::uint64_t examined = 0;
  std::uint64_t singular = 0;

  void add(SparseVector candidate) {
    auto& bucket = by_support[candidate.support()];
    for (const auto& known : bucket)
      if (same_solution(known, candidate)) return;
    bucket.push_back(std::move(candidate));
  }
};

std::string join(const IndexSet& set) { return set.empty() ? "none" : fmt::format("{}", fmt::join(set, ",")); }

std::string join(const std::vector<double>& values) {
  if (values.empty()) return "none";
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out += ',';
    out += io::format_real(values[k]);
  }
  return out;
}

}  // namespace

bool same_solution(const SparseVector& a, const SparseVector& b, double rel_tol) {
  if (a.ambient_dim() != b.ambient_dim() || a.support() != b.support()) return false;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    const double x = a.values()[k];
    const double y = b.values()[k];
    if (std::abs(x - y) > rel_tol * std::max(std::abs(x), std::abs(y))) return false;
  }
  return true;
}

bool SolutionSet::contains(const SparseVector& x) const {
  return std::any_of(solutions.begin(), solutions.end(),
                     [&](const SparseVector& known) { return same_solution(known, x); });
}

// ---------------------------------------------------------------------------
// Exhaustive l0 oracle

SolutionSet solve_l0_exhaustive(const DenseMatrix& a, const Vector& b, Index s, double tol,
                                const EnumerationBudget& budget, Execution execution) {
  require(b.size() == a.rows(), "rhs length does not match matrix rows");
  require(s >= 0, "negative sparsity");
  require(tol > 0.0, "tolerance must be positive");
  const Index n = a.cols();
  const Index k = std::min({s, a.rows(), n});
  budget.check(n, k, s);

  const Matrix& am = a.entries();
  const double allowed = tol * b.norm();

  auto visit = [&](OraclePartial& partial, const IndexSet& support) {
    ++partial.examined;
    const auto z = fit_on_support(am, b, support);
    if (!z) {
      ++partial.singular;
      return;
    }
    if (fit_residual(am, b, support, *z) > allowed) return;

    const double largest = z->size() ? z->cwiseAbs().maxCoeff() : 0.0;
    IndexSet kept;
    for (std::size_t i = 0; i < support.size(); ++i)
      if (std::abs((*z)[static_cast<Index>(i)]) > kChopRatio * largest) kept.push_back(support[i]);
    Vector values = *z;
    if (kept.size() != support.size()) {
      const auto refit = fit_on_support(am, b, kept);
      if (!refit || fit_residual(am, b, kept, *refit) > allowed) return;
      values = *refit;
    } else {
      kept = support;
    }
    partial.add(SparseVector(n, kept, std::vector<double>(values.data(), values.data() + values.size())));
  };
  auto merge = [](OraclePartial& into, OraclePartial&& from) {
    into.examined += from.examined;
    into.singular += from.singular;
    for (auto& [support, bucket] : from.by_support)
      for (auto& candidate : bucket) into.add(std::move(candidate));
  };

  OraclePartial found =
      detail::reduce_combinations(Combinations(n, k), execution, OraclePartial{}, visit, merge);
  std::vector<SparseVector> solutions;
  for (auto& [support, bucket] : found.by_support)
    for (auto& candidate : bucket) solutions.push_back(std::move(candidate));
  std::sort(solutions.begin(), solutions.end(), solution_less);

  SolutionSet out;
  out.dims = {a.rows(), n, s};
  out.tolerance = tol;
  out.solutions = std::move(solutions);
  out.exhausted = true;
  out.supports_examined = found.examined;
  out.singular_supports = found.singular;
  return out;
}

// ---------------------------------------------------------------------------
// Rank condition

RankCondition check_2s_rank_condition(const DenseMatrix& a, Index s, const EnumerationBudget& budget,
                                      Execution execution) {
  require(s >= 1, "sparsity must be at least 1");
  const Index n = a.cols();
  const Index width = 2 * s;
  require(width <= n, fmt::format("2s = {} exceeds N = {}", width, n));

  if (width > a.rows()) {
    IndexSet first(static_cast<std::size_t>(width));
    for (Index j = 0; j < width; ++j) first[static_cast<std::size_t>(j)] = j;
    return {false, std::move(first)};
  }
  budget.check(n, width, s);

  struct Partial {
    bool found = false;
    IndexSet witness;
  };
  auto visit = [&](Partial& partial, const IndexSet& cols) {
    if (partial.found) return;
    Eigen::JacobiSVD<Matrix> svd(a.columns(cols));
    const auto& sv = svd.singularValues();
    if (!(sv[sv.size() - 1] > kRankTolerance * sv[0])) partial = {true, cols};
  };
  auto merge = [](Partial& into, Partial&& from) {
    if (!into.found) into = std::move(from);
  };
  Partial result = detail::reduce_combinations(Combinations(n, width), execution, Partial{}, visit, merge);
  if (!result.found) return {true, std::nullopt};
  return {false, std::move(result.witness)};
}

NonUniqueInstance non_unique_instance(const DenseMatrix& a, const IndexSet& witness) {
  require_index_set(witness, a.cols(), "witness");
  require(witness.size() >= 2 && witness.size() % 2 == 0, "witness must have an even number of columns");
  const Matrix kernel = detail::kernel_basis(a.columns(witness), kRankTolerance);
  require(kernel.cols() > 0, "witness columns are linearly independent");

  const Vector v = kernel.col(0);
  const std::size_t half = witness.size() / 2;
  IndexSet first_support(witness.begin(), witness.begin() + static_cast<std::ptrdiff_t>(half));
  IndexSet second_support(witness.begin() + static_cast<std::ptrdiff_t>(half), witness.end());
  std::vector<double> first_values(half);
  std::vector<double> second_values(half);
  for (std::size_t k = 0; k < half; ++k) {
    first_values[k] = v[static_cast<Index>(k)];
    second_values[k] = -v[static_cast<Index>(k + half)];
  }
  NonUniqueInstance out{SparseVector(a.cols(), std::move(first_support), std::move(first_values)),
                        SparseVector(a.cols(), std::move(second_support), std::move(second_values)),
                        Vector()};
  out.rhs = apply(a, out.first);
  return out;
}

// ---------------------------------------------------------------------------
// Square case: a second solution always exists

SparseVector construct_alternative_solution(const DenseMatrix& a, const SparseVector& x, Index j_prime) {
  const Index m = a.rows();
  const Index n = a.cols();
  require(x.ambient_dim() == n, "signal dimension does not match matrix columns");
  if (x.is_zero()) throw Error(ErrorCode::zero_signal, "zero signal");
  require(x.nnz() <= m, "signal has more than m nonzeros");
  require(n >= m + 1, "need at least m + 1 columns");
  require(j_prime >= 0 && j_prime < n, "j' out of range");
  require(x.at(j_prime) == 0.0, "j' must lie outside supp(x)");

  // Pad supp(x) with the lowest free indices until it has m entries.
  IndexSet support = x.support();
  for (Index j = 0; static_cast<Index>(support.size()) < m; ++j) {
    if (j != j_prime && x.at(j) == 0.0) support.push_back(j);
  }
  IndexSet joint = support;
  joint.push_back(j_prime);
  joint = detail::sorted(std::move(joint));

  const Matrix kernel = detail::kernel_basis(a.columns(joint), kRankTolerance);
  if (kernel.cols() != 1) {
    throw Error(ErrorCode::assumption_violation,
                fmt::format("assumption violation: kernel of A_T has dimension {}, expected 1", kernel.cols()));
  }
  Vector v = kernel.col(0);

  std::size_t pivot = joint.size();
  for (std::size_t k = 0; k < joint.size(); ++k) {
    if (x.at(joint[k]) == 0.0) continue;
    if (pivot == joint.size() || std::abs(v[static_cast<Index>(k)]) > std::abs(v[static_cast<Index>(pivot)])) pivot = k;
  }
  if (std::abs(v[static_cast<Index>(pivot)]) < 1e-12) {
    throw Error(ErrorCode::zero_column_detected,
                fmt::format("zero column detected: kernel vanishes on supp(x), column {} is zero", j_prime));
  }
  v *= x.at(joint[pivot]) / v[static_cast<Index>(pivot)];

  Vector alternative = x.to_dense();
  for (std::size_t k = 0; k < joint.size(); ++k) alternative[joint[k]] -= v[static_cast<Index>(k)];
  alternative[joint[pivot]] = 0.0;
  return SparseVector::from_dense(alternative);
}

// ---------------------------------------------------------------------------
// Non-uniqueness set for a support pair

std::optional<SparseVector> sample_phi_member(const DenseMatrix& a, const IndexSet& s_prime,
                                              const IndexSet& s_dprime, const RngSpec& rng) {
  const Index n = a.cols();
  require_index_set(s_prime, n, "S'");
  require_index_set(s_dprime, n, "S''");
  require(!s_prime.empty(), "S' must be nonempty");

  const IndexSet joint = detail::set_union(s_prime, s_dprime);
  const Matrix kernel = detail::kernel_basis(a.columns(joint), kRankTolerance);
  if (kernel.cols() == 0) return std::nullopt;

  auto position = [&](Index j) {
    return static_cast<Index>(std::lower_bound(joint.begin(), joint.end(), j) - joint.begin());
  };
  const IndexSet own = detail::set_difference(s_prime, s_dprime);
  const IndexSet shared = detail::set_intersection(s_prime, s_dprime);

  Engine engine = rng.engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vector coeffs(kernel.cols());
    for (Index i = 0; i < coeffs.size(); ++i) coeffs[i] = normal(engine);
    const Vector v = kernel * coeffs;
    const double scale = v.cwiseAbs().maxCoeff();

    Vector x_prime = Vector::Zero(n);
    bool full_support = scale > 0.0;
    for (Index j : own) {
      x_prime[j] = v[position(j)];
      full_support = full_support && std::abs(x_prime[j]) > 1e-12 * scale;
    }
    for (Index j : shared) {
      x_prime[j] = normal(engine);
      full_support = full_support && x_prime[j] != 0.0;
    }
    if (!full_support) continue;

    // x'' = x' - v vanishes on S' \ S'' by construction; confirm it.
    bool inside = true;
    for (Index j : own) inside = inside && std::abs(x_prime[j] - v[position(j)]) <= 1e-12 * scale;
    if (!inside) continue;
    return SparseVector::from_dense(x_prime);
  }
  throw Error(ErrorCode::degenerate_sample, "degenerate sample: 100 draws missed the support of S'");
}

PhiReport phi_dimension_report(const DenseMatrix& a, const IndexSet& s_prime, const IndexSet& s_dprime,
                               Index s) {
  const Index n = a.cols();
  require_index_set(s_prime, n, "S'");
  require_index_set(s_dprime, n, "S''");
  require(static_cast<Index>(s_prime.size()) <= s && static_cast<Index>(s_dprime.size()) <= s,
          "support pair exceeds the sparsity level");

  const IndexSet joint = detail::set_union(s_prime, s_dprime);
  const IndexSet own = detail::set_difference(s_prime, s_dprime);

  PhiReport report;
  report.s_prime = s_prime;
  report.s_dprime = s_dprime;
  report.omega_dim = static_cast<Index>(detail::set_intersection(s_prime, s_dprime).size());
  report.bound = 2 * s - a.rows();
  report.pair_bound = static_cast<Index>(s_prime.size() + s_dprime.size()) - a.rows();

  if (!joint.empty()) {
    const Matrix kernel = detail::kernel_basis(a.columns(joint), kRankTolerance);
    report.kernel_dim = kernel.cols();
    if (report.kernel_dim > 0 && !own.empty()) {
      Matrix rows(static_cast<Index>(own.size()), kernel.cols());
      for (std::size_t k = 0; k < own.size(); ++k) {
        const auto pos = std::lower_bound(joint.begin(), joint.end(), own[k]) - joint.begin();
        rows.row(static_cast<Index>(k)) = kernel.row(pos);
      }
      report.psi_dim = detail::numerical_rank(rows, kRankTolerance);
    }
  }
  report.phi_empty = report.kernel_dim == 0;
  report.bound_holds = report.phi_empty || (report.psi_dim + report.omega_dim <= report.pair_bound &&
                                            report.pair_bound <= report.bound);
  return report;
}

// ---------------------------------------------------------------------------
// Records

void write_records(std::ostream& out, const SolutionSet& set) {
  out << fmt::format("record=problem m={} n={} s={} tolerance={}\n", set.dims.m, set.dims.n, set.dims.s,
                     io::format_real(set.tolerance));
  for (std::size_t i = 0; i < set.solutions.size(); ++i) {
    const auto& z = set.solutions[i];
    out << fmt::format("record=solution index={} nnz={} support={} values={}\n", i, z.nnz(),
                       join(z.support()), join(z.values()));
  }
  out << fmt::format(
      "record=summary solutions={} unique={} exhausted={} supports_examined={} singular_supports={}\n",
      set.solutions.size(), set.unique(), set.exhausted, set.supports_examined, set.singular_supports);
}

void write_records(std::ostream& out, const RankCondition& rank, Index s) {
  out << fmt::format("record=rank_condition s={} holds={} witness={}\n", s, rank.holds,
                     rank.witness ? join(*rank.witness) : std::string("none"));
}

void write_records(std::ostream& out, const PhiReport& report) {
  out << fmt::format(
      "record=phi s_prime={} s_dprime={} kernel_dim={} psi_dim={} omega_dim={} pair_bound={} bound={} "
      "phi_empty={} bound_holds={}\n",
      join(report.s_prime), join(report.s_dprime), report.kernel_dim, report.psi_dim, report.omega_dim,
      report.pair_bound, report.bound, report.phi_empty, report.bound_holds);
}

}  // namespace htpkit
