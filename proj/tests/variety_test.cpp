#include "divark/variety.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace divark {
namespace {

using testing::diagonal_colligation;
using testing::identity_colligation;
using testing::multiset_distance;
using testing::neil_colligation;

VarietyRealization neil() { return VarietyRealization(neil_colligation()); }

/// Winding of phi along the parametrization zeta -> (zeta^3, zeta^2) of the
/// Neil parabola, computed on the circle |zeta| = 1 with a fine grid.
long neil_parametrized_winding(const RationalInner& phi) {
  constexpr int kSteps = 1 << 14;
  double total = 0.0;
  Complex prev = phi(1.0, 1.0);
  for (int k = 1; k <= kSteps; ++k) {
    const Complex zeta = std::polar(1.0, 2.0 * kPi * k / kSteps);
    const Complex cur = phi(zeta * zeta * zeta, zeta * zeta);
    total += std::arg(cur / prev);
    prev = cur;
  }
  return std::lround(total / (2.0 * kPi));
}

TEST(Membership, NeilPoints) {
  VarietyRealization v = neil();
  EXPECT_TRUE(membership(v, 0.0, 0.0).inside);
  EXPECT_TRUE(membership(v, 0.125, 0.25).inside);
  Membership off = membership(v, 0.5, 0.5);
  EXPECT_FALSE(off.inside);
  // |w^3 - z^2| = 1/8, normalized by (1 + ||Psi(1/2)||)^3 = 8
  EXPECT_NEAR(off.residual, 1.0 / 64.0, 1e-14);
}

TEST(Membership, FlipConsistencyOnNeil) {
  VarietyRealization v = neil();
  VarietyRealization flipped(flip(v.colligation()));
  std::mt19937_64 rng(17);
  int checked = 0;
  while (checked < 100) {
    const Complex z = random_in_disk(rng, 0.95);
    for (Complex w : fibers_over_z(v, z)) {
      Membership a = membership(v, z, w);
      Membership b = membership(flipped, w, z);
      EXPECT_LE(a.residual, 1e-6);
      EXPECT_LE(b.residual, 1e-6);
      ++checked;
    }
  }
}

TEST(Fibers, Neil) {
  VarietyRealization v = neil();
  for (Complex w : fibers_over_z(v, 0.0)) EXPECT_EQ(std::abs(w), 0.0);
  const Complex omega = std::polar(1.0, 2.0 * kPi / 3.0);
  EXPECT_LE(multiset_distance(fibers_over_z(v, 0.125),
                              {0.25, 0.25 * omega, 0.25 * omega * omega}),
            1e-12);
  for (double theta : {0.1, 1.7, 4.0}) {
    for (Complex w : fibers_over_z(v, std::polar(1.0, theta))) {
      EXPECT_NEAR(std::abs(w), 1.0, 1e-9);
    }
  }
}

TEST(BoundaryTrace, NeilMatchesClosedForm) {
  BoundaryTrace trace = boundary_trace(neil(), 256);
  ASSERT_EQ(trace.grid(), 256u);
  ASSERT_EQ(trace.branch_count(), 3u);
  const Complex omega = std::polar(1.0, 2.0 * kPi / 3.0);
  for (std::size_t k = 0; k < trace.grid(); ++k) {
    const Complex base = std::polar(1.0, 2.0 * trace.thetas[k] / 3.0);
    EXPECT_LE(multiset_distance(trace.branches[k], {base, base * omega, base * omega * omega}),
              1e-9);
    for (Complex w : trace.branches[k]) EXPECT_NEAR(std::abs(w), 1.0, 1e-9);
  }
  // consecutive samples move by about (2/3)(2 pi / 256)
  EXPECT_LT(trace.continuity_defect, 0.02);
}

TEST(BoundaryTrace, ShiftHasOneBranch) {
  BoundaryTrace trace = boundary_trace(VarietyRealization(diagonal_colligation()), 64);
  ASSERT_EQ(trace.branch_count(), 1u);
  for (std::size_t k = 0; k < trace.grid(); ++k) {
    EXPECT_NEAR(std::abs(trace.branches[k][0] - std::polar(1.0, trace.thetas[k])), 0.0, 1e-15);
  }
}

TEST(BoundaryTrace, RandomPureColligationIsUnimodularAndRefines) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    VarietyRealization v(random_colligation(2, 2, rng));
    BoundaryTrace trace = boundary_trace(v, 512);
    for (const auto& row : trace.branches) {
      for (Complex w : row) {
        EXPECT_GE(std::abs(w), 1.0 - 1e-6);
        EXPECT_LE(std::abs(w), 1.0 + 1e-8);
      }
    }
    BoundaryTrace finer = boundary_trace(v, 1024);
    EXPECT_LT(finer.continuity_defect, trace.continuity_defect);
  }
}

TEST(BoundaryTrace, RejectsSmallGrid) {
  EXPECT_THROW(boundary_trace(neil(), 32), Error);
}

TEST(Audit, NeilIsDistinguished) {
  DistinguishedAudit audit = audit_distinguished(neil(), 16, 256);
  EXPECT_TRUE(audit.is_distinguished);
  EXPECT_LE(audit.worst_interior_modulus, std::pow(0.95, 2.0 / 3.0) + 1e-12);
  EXPECT_LE(audit.worst_boundary_deviation, 1e-9);
}

TEST(Audit, DiagonalIsDistinguished) {
  VarietyRealization v(diagonal_colligation());
  EXPECT_TRUE(audit_distinguished(v, 16, 64).is_distinguished);
  for (Complex z : {Complex(0.2, 0.1), Complex(-0.7, 0.0)}) {
    auto fiber = fibers_over_z(v, z);
    ASSERT_EQ(fiber.size(), 1u);
    EXPECT_NEAR(std::abs(fiber[0] - z), 0.0, 1e-15);
  }
}

TEST(Audit, IdentityIsEmpty) {
  try {
    VarietyRealization v(identity_colligation());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyVariety);
  }
}

TEST(CountZeroes, NeilParabolaCounts) {
  VarietyRealization v = neil();
  EXPECT_EQ(count_zeroes(v, RationalInner::monomial(2, 0), 64), 6);
  EXPECT_EQ(count_zeroes(v, RationalInner::monomial(0, 3), 64), 6);
}

TEST(CountZeroes, ProductOfCoordinatesAgreesWithParametrization) {
  RationalInner zw = RationalInner::monomial(1, 1);
  EXPECT_EQ(neil_parametrized_winding(zw), 5);
  EXPECT_EQ(count_zeroes(neil(), zw, 64), 5);
}

TEST(CountZeroes, MobiusFactor) {
  // p = 3 + z, degree (1,0): phi = (3z + 1)/(3 + z) vanishes at z = -1/3
  RationalInner phi(BiPoly({{{0, 0}, 3.0}, {{1, 0}, 1.0}}), 1, 0);
  EXPECT_EQ(neil_parametrized_winding(phi), 3);
  EXPECT_EQ(count_zeroes(neil(), phi, 64), 3);
}

TEST(CountZeroes, GridRefinementInvariance) {
  VarietyRealization v = neil();
  RationalInner phi(BiPoly({{{0, 0}, 2.0}, {{1, 1}, Complex(0.3, 0.4)}}), 1, 1);
  for (std::size_t g : {64u, 128u, 256u}) {
    EXPECT_EQ(count_zeroes(v, phi, g), count_zeroes(v, phi, 2 * g));
  }
}

TEST(CountZeroes, Multiplicative) {
  VarietyRealization v = neil();
  for (auto [a1, a2, b1, b2] : std::vector<std::array<int, 4>>{
           {1, 0, 0, 1}, {2, 1, 1, 2}, {0, 2, 3, 0}}) {
    RationalInner phi = RationalInner::monomial(a1, a2);
    RationalInner psi = RationalInner::monomial(b1, b2);
    EXPECT_EQ(count_zeroes(v, phi * psi, 64),
              count_zeroes(v, phi, 64) + count_zeroes(v, psi, 64));
  }
}

TEST(CountZeroes, HomotopyInvariance) {
  VarietyRealization v = neil();
  RationalInner phi(BiPoly({{{0, 0}, 2.0}, {{1, 0}, 0.4}, {{0, 1}, Complex(0, 0.5)},
                            {{1, 1}, 0.5}}),
                    1, 1);
  for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    // rank (3, 2) times degree (1, 1)
    EXPECT_EQ(count_zeroes(v, phi.dilate(r), 64), 5) << "r = " << r;
  }
}

TEST(CountZeroes, RejectsIrregular) {
  RationalInner phi(BiPoly({{{0, 0}, 1.0}, {{1, 0}, 1.0}}), 1, 0);
  try {
    count_zeroes(neil(), phi, 64);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotRegular);
  }
}

}  // namespace
}  // namespace divark
