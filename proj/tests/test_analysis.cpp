#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "htpkit/analysis.hpp"
#include "htpkit/solvers.hpp"
#include "oracles.hpp"

using namespace htpkit;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected htpkit::Error";
  return ErrorCode::io;
}

DenseMatrix gaussian(Index m, Index n, std::uint64_t seed, std::uint64_t index = 0) {
  return generate_gaussian_matrix(m, n, RngSpec(seed).child("analysis-test", {index}), true);
}

DenseMatrix orthonormal(Index m, Index n, std::uint64_t seed) {
  const Matrix g = generate_gaussian_matrix(m, n, RngSpec(seed).child("q"), false).entries();
  Eigen::HouseholderQR<Matrix> qr(g);
  return DenseMatrix(Matrix(qr.householderQ() * Matrix::Identity(m, n)));
}

}  // namespace

TEST(ExactRic, OrthonormalColumnsHaveZeroConstant) {
  const DenseMatrix q = orthonormal(6, 4, 1);
  ASSERT_TRUE(q.column_normalized());
  for (Index k = 1; k <= 4; ++k) EXPECT_NEAR(exact_ric(q, k).delta, 0.0, 1e-14);
}

TEST(ExactRic, IdenticalColumns) {
  Matrix m = gaussian(4, 5, 2).entries();
  m.col(3) = m.col(1);
  const RicEstimate r = exact_ric(DenseMatrix(m), 2);
  EXPECT_NEAR(r.delta, 1.0, 1e-12);
  EXPECT_NEAR(r.sigma_max, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.sigma_min, 0.0, 1e-7);
  EXPECT_EQ(r.worst_support.size(), 2u);
  EXPECT_EQ(r.sigma_min_support, (IndexSet{1, 3}));
  EXPECT_EQ(r.sigma_max_support, (IndexSet{1, 3}));
}

TEST(ExactRic, DominatesSampledLowerBound) {
  const DenseMatrix a = gaussian(8, 12, 3);
  const RicEstimate r = exact_ric(a, 3);
  std::mt19937_64 rng(3);
  const double sampled = oracle::sampled_ric(a.entries(), 3, 10000, rng);
  EXPECT_GE(r.delta + 1e-12, sampled);
  EXPECT_GT(sampled, 0.5 * r.delta);
}

TEST(ExactRic, InvariantAndMonotone) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const DenseMatrix a = gaussian(6, 10, 4, t);
    double previous = 0.0;
    for (Index k = 1; k <= 5; ++k) {
      const RicEstimate r = exact_ric(a, k);
      EXPECT_NEAR(r.delta, std::max(1.0 - r.sigma_min * r.sigma_min, r.sigma_max * r.sigma_max - 1.0), 1e-12);
      EXPECT_GE(r.delta, 0.0);
      EXPECT_EQ(static_cast<Index>(r.worst_support.size()), k);
      EXPECT_GE(r.delta + 1e-12, previous);
      previous = r.delta;
    }
  }
}

TEST(ExactRic, MatchesSvdOfWorstSupport) {
  const DenseMatrix a = gaussian(7, 11, 5);
  const RicEstimate r = exact_ric(a, 3);
  Eigen::JacobiSVD<Matrix> lo(a.columns(r.sigma_min_support));
  Eigen::JacobiSVD<Matrix> hi(a.columns(r.sigma_max_support));
  EXPECT_NEAR(lo.singularValues()[2], r.sigma_min, 1e-12);
  EXPECT_NEAR(hi.singularValues()[0], r.sigma_max, 1e-12);
}

TEST(ExactRic, Preconditions) {
  EXPECT_EQ(code_of([] { exact_ric(DenseMatrix(Matrix::Ones(3, 4)), 2); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { exact_ric(gaussian(8, 17, 6), 2); }), ErrorCode::enumeration_too_large);
  EXPECT_EQ(code_of([] { exact_ric(gaussian(8, 12, 6), 6); }), ErrorCode::enumeration_too_large);
  EXPECT_EQ(code_of([] { exact_ric(gaussian(3, 6, 6), 4); }), ErrorCode::invalid_argument);
}

TEST(Interlacing, Orthonormal) {
  const InterlacingReport r = verify_deflation_interlacing(orthonormal(6, 5, 7), 3, 2);
  EXPECT_NEAR(r.delta_before, 0.0, 1e-14);
  EXPECT_NEAR(r.delta_after, 0.0, 1e-14);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.hypothesis_met);
}

TEST(Interlacing, GaussianSingleStep) {
  const InterlacingReport r = verify_deflation_interlacing(gaussian(6, 9, 8), 3, 0);
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.delta_after, r.delta_before + 1e-10);
}

TEST(Interlacing, DeflatedMatrixIsProjected) {
  const DenseMatrix a = gaussian(5, 7, 9);
  const DenseMatrix d = deflate_matrix(a, 4);
  EXPECT_EQ(d.cols(), 6);
  for (Index j = 0; j < 6; ++j) EXPECT_LE(std::abs(d.col(j).dot(a.col(4))), 1e-12);
  EXPECT_FALSE(d.column_normalized());
}

TEST(Interlacing, ChainOverSeeds) {
  std::mt19937_64 rng(10);
  for (std::uint64_t t = 0; t < 100; ++t) {
    const DenseMatrix a = gaussian(8, 11, 10, t);
    const IndexSet pivots = {std::uniform_int_distribution<Index>(0, 10)(rng),
                             std::uniform_int_distribution<Index>(0, 9)(rng)};
    const ChainReport chain = verify_deflation_chain(a, 4, pivots);
    ASSERT_EQ(chain.steps.size(), 2u);
    EXPECT_EQ(chain.steps[1].order, 2);
    if (chain.hypothesis_met) {
      EXPECT_TRUE(chain.holds()) << "trial " << t;
    }
  }
}

TEST(Projection, OrthonormalBlocks) {
  const ProjectionReport r = check_projection_inner_products(orthonormal(8, 5, 11), Split::three_way);
  EXPECT_NEAR(r.delta, 0.0, 1e-14);
  EXPECT_NEAR(r.b2_pb2, 1.0, 1e-14);
  ASSERT_TRUE(r.b3_pb2);
  EXPECT_NEAR(*r.b3_pb2, 0.0, 1e-14);
  EXPECT_TRUE(r.interval_holds);
  EXPECT_TRUE(r.cross_bound_holds);
  EXPECT_FALSE(r.vacuous);
}

TEST(Projection, GaussianOverSeeds) {
  int checked = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const ProjectionReport r = check_projection_inner_products(gaussian(10, 5, 12, t), Split::three_way);
    if (r.vacuous) continue;
    ++checked;
    EXPECT_TRUE(r.interval_holds) << "seed " << t;
    EXPECT_TRUE(r.cross_bound_holds) << "seed " << t;
  }
  EXPECT_GT(checked, 100);
}

TEST(Projection, TwoWayAgainstExplicitProjector) {
  const DenseMatrix b = gaussian(9, 4, 13);
  const ProjectionReport r = check_projection_inner_products(b, Split::two_way);
  const Matrix b1 = b.entries().leftCols(3);
  const Matrix p = Matrix::Identity(9, 9) - b1 * (b1.transpose() * b1).inverse() * b1.transpose();
  EXPECT_NEAR(r.b2_pb2, b.col(3).dot(p * b.col(3)), 1e-12);
  EXPECT_FALSE(r.b3_pb2);
  Eigen::JacobiSVD<Matrix> svd(Matrix(b.entries().transpose() * b.entries() - Matrix::Identity(4, 4)));
  EXPECT_NEAR(r.delta, svd.singularValues()[0], 1e-12);
}

TEST(Projection, VacuousWhenDeltaLarge) {
  Matrix m = gaussian(6, 4, 14).entries();
  m.col(3) = (m.col(0) + 0.01 * m.col(3)).normalized();
  m.col(2) = (m.col(1) + 0.01 * m.col(2)).normalized();
  const ProjectionReport r = check_projection_inner_products(DenseMatrix(m), Split::three_way);
  EXPECT_GE(r.delta, 1.0);
  EXPECT_TRUE(r.vacuous);
  EXPECT_TRUE(r.b3_pb2);
}

TEST(Projection, SingularLeadingBlock) {
  Matrix m = gaussian(6, 4, 15).entries();
  m.col(1) = m.col(0);
  try {
    check_projection_inner_products(DenseMatrix(m), Split::two_way);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_leading_block);
    EXPECT_NE(std::string(e.what()).find("singular B_1"), std::string::npos);
  }
}

TEST(Dominance, Examples) {
  const DominanceFactor f = dominance_factor(SparseVector::from_dense(Eigen::Vector4d(5, 3, 4, 0)));
  EXPECT_EQ(f.l, 0);
  EXPECT_DOUBLE_EQ(f.gamma, 1.0);
  EXPECT_EQ(dominance_factor(SparseVector(5, {3}, {-2.0})).gamma, std::numeric_limits<double>::infinity());
  EXPECT_EQ(dominance_factor(SparseVector(5, {1, 3}, {-2.0, 2.0})).l, 1);
  EXPECT_EQ(code_of([] { dominance_factor(SparseVector::zero(3)); }), ErrorCode::zero_signal);
}

TEST(Dominance, AgreesWithDirectNorms) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    const SparseVector x = generate_sparse_signal(30, 8, RngSpec(16).child("x", {t}));
    const Vector d = x.to_dense();
    Index l = 0;
    d.cwiseAbs().maxCoeff(&l);
    Vector rest = d;
    rest[l] = 0.0;
    const DominanceFactor f = dominance_factor(x);
    EXPECT_EQ(f.l, l);
    EXPECT_NEAR(f.gamma, std::abs(d[l]) / rest.norm(), 1e-12 * f.gamma);

    const SparseVector scaled = SparseVector::from_dense(Vector(4.5 * d));
    EXPECT_EQ(dominance_factor(scaled).l, f.l);
    EXPECT_NEAR(dominance_factor(scaled).gamma, f.gamma, 1e-12 * f.gamma);
  }
}

TEST(Thresholds, ClosedForms) {
  EXPECT_EQ(gamma_threshold_dp(0.0, 1.0), 2.0);
  EXPECT_EQ(gamma_threshold_dp(0.0, 0.0), 0.0);
  EXPECT_NEAR(gamma_threshold_dp(0.1, 0.5), 1.375, 1e-15);
  EXPECT_EQ(gamma_threshold_omp(0.0), 1.0);
  EXPECT_GT(gamma_threshold_omp(0.49), 100.0);
  EXPECT_NEAR(gamma_threshold_omp(0.25), (0.25 + std::sqrt(1.625)) / 0.5, 1e-14);
  EXPECT_NEAR(gamma_threshold_omp(0.25), 3.0495, 1e-4);
}

TEST(Thresholds, UndefinedFromOneHalf) {
  for (double d : {0.5, 0.6, 1.0}) {
    EXPECT_EQ(code_of([&] { gamma_threshold_dp(d, 1.0); }), ErrorCode::threshold_undefined);
    EXPECT_EQ(code_of([&] { gamma_threshold_omp(d); }), ErrorCode::threshold_undefined);
  }
}

TEST(TailRatio, Extremes) {
  const SparseVector x(8, {0, 2, 5, 7}, {4.0, 1.0, -2.0, 0.5});
  EXPECT_EQ(tail_ratio(x, {2, 5, 7}), 0.0);
  EXPECT_EQ(tail_ratio(x, {1, 2, 3, 4, 5, 6, 7}), 0.0);
  EXPECT_DOUBLE_EQ(tail_ratio(x, {1, 3}), 1.0);
  EXPECT_DOUBLE_EQ(tail_ratio(x, {5}), std::sqrt(1.25) / std::sqrt(5.25));
  EXPECT_EQ(tail_ratio(SparseVector(8, {4}, {1.0}), {}), 0.0);
}

TEST(TailRatio, HtpSupportOnMidDifficultyInstance) {
  int interior = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const RngSpec spec = RngSpec(17).child("mid", {t});
    const DenseMatrix a = generate_gaussian_matrix(60, 120, spec.child("matrix"), true);
    const SparseVector x = generate_sparse_signal(120, 30, spec.child("signal"));
    const RecoveryOutcome out = htp(a, apply(a, x), 30, SparseVector::zero(120));
    const double r = tail_ratio(x, out.support);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    if (r > 0.0 && r < 1.0) ++interior;
  }
  EXPECT_GT(interior, 0);
}

TEST(DominanceReport, Consistency) {
  const SparseVector x(10, {0, 3, 6}, {10.0, 1.0, 1.0});
  const DominanceReport r = dominance_report(x, {0, 3}, 0.1);
  EXPECT_EQ(r.l, 0);
  EXPECT_NEAR(r.gamma, 10.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.tail_ratio, 1.0 / std::sqrt(2.0), 1e-12);
  ASSERT_TRUE(r.threshold_dp);
  EXPECT_EQ(r.satisfied_dp, r.gamma > *r.threshold_dp);
  EXPECT_EQ(r.satisfied_omp, r.gamma > *r.threshold_omp);
  const DominanceReport none = dominance_report(x, {0, 3}, 0.7);
  EXPECT_FALSE(none.threshold_dp);
  EXPECT_FALSE(none.satisfied_dp);
}

TEST(OffSupportBound, UpperBoundReading) {
  for (std::uint64_t t = 0; t < 30; ++t) {
    const RngSpec spec = RngSpec(18).child("audit", {t});
    const DenseMatrix a = generate_gaussian_matrix(10, 14, spec.child("matrix"), true);
    const SparseVector x = generate_sparse_signal(14, 3, spec.child("signal"));
    // S: two true indices and two wrong ones, so |S u S*| = 5.
    IndexSet s = {x.support()[0], x.support()[1]};
    for (Index j = 0; s.size() < 4; ++j)
      if (x.at(j) == 0.0) s.push_back(j);
    const double delta = exact_ric(a, 5).delta;
    if (delta >= 1.0) continue;
    const SelectionBoundAudit audit = audit_offsupport_bound(a, x, detail::sorted(s), delta);
    EXPECT_TRUE(audit.upper_bound_holds) << "trial " << t;
    EXPECT_FALSE(audit.note.empty());
  }
}
