#include <gtest/gtest.h>

#include <random>

#include "divark/sdp.hpp"

namespace divark {
namespace {

CMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  CMatrix g = random_gaussian(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

// min <C, X> with tr X = 1 is the smallest eigenvalue of C.
TEST(Sdp, TraceOneProblemFindsSmallestEigenvalue) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index n = 2 + trial;
    sdp::Problem p;
    p.block_sizes = {n};
    p.c = {random_hermitian(n, rng)};
    p.a = {{CMatrix::Identity(n, n)}};
    p.b = RVector::Constant(1, 1.0);
    const auto r = sdp::solve(p);
    ASSERT_TRUE(r.converged);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(p.c[0]);
    EXPECT_NEAR(r.primal_objective, es.eigenvalues()(0), 1e-8);
    EXPECT_NEAR(r.y(0), es.eigenvalues()(0), 1e-8);
  }
}

// Two blocks: min x1 + 2 x2 with x1 + x2 = 3 puts all mass on the first.
TEST(Sdp, ScalarBlocksBehaveLikeLinearProgram) {
  sdp::Problem p;
  p.block_sizes = {1, 1};
  p.c = {CMatrix::Constant(1, 1, 1.0), CMatrix::Constant(1, 1, 2.0)};
  p.a = {{CMatrix::Constant(1, 1, 1.0), CMatrix::Constant(1, 1, 1.0)}};
  p.b = RVector::Constant(1, 3.0);
  const auto r = sdp::solve(p);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0](0, 0).real(), 3.0, 1e-8);
  EXPECT_NEAR(r.x[1](0, 0).real(), 0.0, 1e-8);
  EXPECT_NEAR(r.y(0), 1.0, 1e-8);
}

// Fixing an off-diagonal entry with complex data: the primal optimum of
// min tr X with X_11 = X_22 free and Re X_12 = a, Im X_12 = b is 2|a + ib|.
TEST(Sdp, ComplexOffDiagonalConstraint) {
  const Complex target(0.3, -0.4);
  sdp::Problem p;
  p.block_sizes = {2};
  p.c = {CMatrix::Identity(2, 2)};
  CMatrix re = CMatrix::Zero(2, 2);
  re(0, 1) = re(1, 0) = 0.5;
  CMatrix im = CMatrix::Zero(2, 2);
  im(0, 1) = Complex(0.0, 0.5);
  im(1, 0) = Complex(0.0, -0.5);
  p.a = {{re}, {im}};
  p.b = RVector(2);
  // Re tr(re X) = Re X_01, Re tr(im X) = Re(0.5i X_10 - 0.5i X_01) = Im X_01
  p.b << target.real(), target.imag();
  const auto r = sdp::solve(p);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.primal_objective, 2.0 * std::abs(target), 1e-8);
  EXPECT_NEAR(std::abs(r.x[0](0, 1) - target), 0.0, 1e-7);
  EXPECT_GE(min_eigenvalue(r.x[0]), -1e-9);
  EXPECT_GE(min_eigenvalue(r.s[0]), -1e-9);
}

TEST(Sdp, BlockHelpers) {
  const auto id = sdp::identity_blocks({2, 3}, 2.0);
  EXPECT_DOUBLE_EQ(sdp::inner(id, id), 20.0);
  EXPECT_DOUBLE_EQ(sdp::frobenius(sdp::zero_blocks({4})), 0.0);
}

}  // namespace
}  // namespace divark
