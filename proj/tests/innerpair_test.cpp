#include "divark/innerpair.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace divark {
namespace {

// Truncated Taylor series; the H^2 inner product is the l^2 pairing of
// coefficients.
constexpr std::size_t kTerms = 800;
using Series = std::vector<Complex>;

Series series_mul(const Series& a, const Series& b) {
  Series out(kTerms, 0.0);
  for (std::size_t i = 0; i < kTerms; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; i + j < kTerms; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

/// 1 / (1 - c z).
Series geometric(Complex c) {
  Series out(kTerms);
  Complex p = 1.0;
  for (auto& x : out) {
    x = p;
    p *= c;
  }
  return out;
}

/// (z - a) / (1 - conj(a) z).
Series blaschke_factor(Complex a) {
  Series lin(kTerms, 0.0);
  lin[0] = -a;
  lin[1] = 1.0;
  return series_mul(lin, geometric(std::conj(a)));
}

Complex h2_inner(const Series& f, const Series& g) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < kTerms; ++i) s += f[i] * std::conj(g[i]);
  return s;
}

Series blaschke_series(const BlaschkeProduct& phi) {
  Series out(kTerms, 0.0);
  out[0] = phi.unimodular_constant();
  for (Complex a : phi.zeros()) out = series_mul(out, blaschke_factor(a));
  return out;
}

/// Series of each basis function, built factor by factor.
std::vector<Series> basis_series(const BlaschkeProduct& phi) {
  std::vector<Series> out;
  Series partial(kTerms, 0.0);
  partial[0] = 1.0;
  for (Complex a : phi.zeros()) {
    Series e = series_mul(partial, geometric(std::conj(a)));
    for (auto& x : e) x *= std::sqrt(1.0 - std::norm(a));
    out.push_back(e);
    partial = series_mul(partial, blaschke_factor(a));
  }
  return out;
}

Complex szego(Complex z, Complex l) { return 1.0 / (1.0 - z * std::conj(l)); }

std::vector<BlaschkeProduct> sample_products() {
  return {BlaschkeProduct::power(2),
          BlaschkeProduct({0.0, 0.5}),
          BlaschkeProduct({Complex(0.3, 0.4), Complex(0.3, 0.4), -0.6}, std::polar(1.0, 0.7)),
          BlaschkeProduct({Complex(-0.2, 0.7), 0.1, Complex(0.5, -0.5), 0.0})};
}

TEST(BlaschkeProduct, Validation) {
  EXPECT_THROW(BlaschkeProduct({}), Error);
  EXPECT_THROW(BlaschkeProduct({1.0}), Error);
  EXPECT_THROW(BlaschkeProduct({0.1}, 2.0), Error);
  BlaschkeProduct phi({0.5});
  EXPECT_NEAR(std::abs(phi(std::polar(1.0, 1.3))), 1.0, 1e-15);
  EXPECT_EQ(std::abs(phi(0.5)), 0.0);
}

TEST(ModelBasis, MonomialCokernels) {
  for (int d : {2, 3}) {
    ModelBasis basis = model_space_basis(BlaschkeProduct::power(d));
    ASSERT_EQ(basis.dim(), d);
    const Complex z(0.3, -0.2);
    CVector v = basis(z);
    for (int k = 0; k < d; ++k) EXPECT_NEAR(std::abs(v(k) - std::pow(z, k)), 0.0, 1e-15);
  }
}

TEST(ModelBasis, ZerosZeroAndHalf) {
  ModelBasis basis = model_space_basis(BlaschkeProduct({0.0, 0.5}));
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Complex z = random_in_disk(rng);
    CVector v = basis(z);
    EXPECT_NEAR(std::abs(v(0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(v(1) - z * std::sqrt(0.75) / (1.0 - 0.5 * z)), 0.0, 1e-14);
  }
}

TEST(ModelBasis, OrthonormalInHardySpace) {
  for (const auto& phi : sample_products()) {
    auto series = basis_series(phi);
    ModelBasis basis(phi);
    // the oracle series match the closed form
    const Complex z(0.21, 0.33);
    CVector v = basis(z);
    for (std::size_t k = 0; k < series.size(); ++k) {
      Complex s = 0.0;
      Complex p = 1.0;
      for (std::size_t i = 0; i < kTerms; ++i, p *= z) s += series[k][i] * p;
      EXPECT_NEAR(std::abs(s - v(static_cast<Eigen::Index>(k))), 0.0, 1e-12);
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
      for (std::size_t j = 0; j < series.size(); ++j) {
        EXPECT_NEAR(std::abs(h2_inner(series[i], series[j]) - (i == j ? 1.0 : 0.0)), 0.0,
                    1e-10);
      }
    }
  }
}

TEST(ModelBasis, OrthogonalToRangeOfPhi) {
  std::mt19937_64 rng(8);
  for (const auto& phi : sample_products()) {
    auto series = basis_series(phi);
    Series phi_series = blaschke_series(phi);
    for (int t = 0; t < 20; ++t) {
      const Complex l = random_in_disk(rng, 0.9);
      Series target = series_mul(phi_series, geometric(std::conj(l)));
      for (const auto& e : series) EXPECT_LE(std::abs(h2_inner(e, target)), 1e-8);
    }
  }
}

TEST(ModelBasis, KernelExpansion) {
  std::mt19937_64 rng(9);
  for (const auto& phi : sample_products()) {
    ModelBasis basis(phi);
    for (int t = 0; t < 50; ++t) {
      const Complex z = random_in_disk(rng);
      const Complex l = random_in_disk(rng);
      const Complex lhs = szego(z, l) * (1.0 - phi(z) * std::conj(phi(l)));
      const Complex rhs = basis(l).dot(basis(z));
      EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-8);
    }
  }
}

TEST(InnerPair, CrossIdentityAndIsometry) {
  std::mt19937_64 rng(10);
  auto products = sample_products();
  for (const auto& phi1 : products) {
    for (const auto& phi2 : products) {
      ModelBasis e(phi1);
      ModelBasis f(phi2);
      for (int t = 0; t < 50; ++t) {
        const Complex z = random_in_disk(rng, 0.9);
        const Complex l = random_in_disk(rng, 0.9);
        const Complex se = e(l).dot(e(z));
        const Complex sf = f(l).dot(f(z));
        const Complex p1 = phi1(z) * std::conj(phi1(l));
        const Complex p2 = phi2(z) * std::conj(phi2(l));
        const Complex left = se / (1.0 - p1);
        const Complex right = sf / (1.0 - p2);
        EXPECT_LE(std::abs(left - right), 1e-7 * std::abs(left));
        // (e, phi1 f) and (phi2 e, f) have equal Gram entries
        EXPECT_NEAR(std::abs((se + p1 * sf) - (p2 * se + sf)), 0.0, 1e-8);
      }
    }
  }
}

TEST(InnerPair, SquareAndCubeGiveCyclicShift) {
  Colligation col =
      colligation_from_inner_pair(BlaschkeProduct::power(2), BlaschkeProduct::power(3));
  ASSERT_EQ(col.m(), 2);
  ASSERT_EQ(col.n(), 3);
  CMatrix shift = CMatrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) shift((i + 2) % 5, i) = 1.0;
  EXPECT_LE(operator_norm(col.unitary() - shift), 1e-9);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Complex z = random_in_disk(rng, 0.95);
    const Complex w = random_in_disk(rng, 0.95);
    CMatrix psi = transfer(col, z);
    const Complex det = (psi - w * CMatrix::Identity(2, 2)).determinant();
    EXPECT_NEAR(std::abs(det - (w * w - z * z * z)), 0.0, 1e-9);
  }
}

TEST(InnerPair, IdentityPairGivesSwap) {
  Colligation col =
      colligation_from_inner_pair(BlaschkeProduct::power(1), BlaschkeProduct::power(1));
  CMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_LE(operator_norm(col.unitary() - swap), 1e-12);
  EXPECT_NEAR(std::abs(transfer(col, Complex(0.4, 0.1))(0, 0) - Complex(0.4, 0.1)), 0.0, 1e-14);
}

TEST(InnerPair, IntertwiningAndTransferIdentity) {
  std::mt19937_64 rng(12);
  auto products = sample_products();
  for (const auto& phi1 : products) {
    for (const auto& phi2 : products) {
      Colligation col = colligation_from_inner_pair(phi1, phi2);
      EXPECT_EQ(col.m(), phi1.degree());
      EXPECT_EQ(col.n(), phi2.degree());
      ModelBasis e(phi1);
      ModelBasis f(phi2);
      for (int t = 0; t < 20; ++t) {
        const Complex z = random_in_disk(rng, 0.95);
        CVector x(col.m() + col.n());
        CVector y(col.m() + col.n());
        x << e(z), phi1(z) * f(z);
        y << phi2(z) * e(z), f(z);
        EXPECT_LE((col.unitary() * x - y).norm(), 1e-7);
        EXPECT_LE((transfer(col, phi1(z)) * e(z) - phi2(z) * e(z)).norm(), 1e-7);
      }
    }
  }
}

TEST(InnerPair, RankDeficientSamples) {
  auto phi1 = BlaschkeProduct::power(2);
  auto phi2 = BlaschkeProduct::power(3);
  for (const std::vector<Complex>& samples :
       {std::vector<Complex>{0.1, 0.2}, std::vector<Complex>(8, Complex(0.3, 0.1))}) {
    try {
      colligation_from_inner_pair(phi1, phi2, samples);
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::RankDeficientSamples);
    }
  }
}

TEST(InnerPair, SampleChoiceDoesNotMatterOnTheSpan) {
  auto phi1 = BlaschkeProduct({Complex(0.3, 0.4), -0.6});
  auto phi2 = BlaschkeProduct({0.2, Complex(0, 0.5), 0.0});
  std::mt19937_64 rng(13);
  std::vector<Complex> samples;
  for (int k = 0; k < 12; ++k) samples.push_back(random_in_disk(rng, 0.9));
  Colligation a = colligation_from_inner_pair(phi1, phi2);
  Colligation b = colligation_from_inner_pair(phi1, phi2, samples);
  // the span of the sample vectors is all of C^5, so U is pinned down
  EXPECT_LE(operator_norm(a.unitary() - b.unitary()), 1e-7);
}

TEST(VerifyPair, MonomialAndMobiusPairs) {
  std::mt19937_64 rng(14);
  auto z2 = BlaschkeProduct::power(2);
  auto z3 = BlaschkeProduct::power(3);
  VarietyRealization v23(colligation_from_inner_pair(z2, z3));
  EXPECT_LE(verify_pair_on_variety(z2, z3, v23, 100, rng), 1e-7);
  // the realized curve is the zero set of w^2 - z^3
  for (int t = 0; t < 20; ++t) {
    const Complex z = random_in_disk(rng, 0.9);
    const Complex w = random_in_disk(rng, 0.9);
    const double oracle = std::abs(w * w - z * z * z);
    const double norm = 1.0 + operator_norm(transfer(v23.colligation(), z));
    EXPECT_NEAR(membership(v23, z, w).residual, oracle / (norm * norm), 1e-12);
  }

  auto z1 = BlaschkeProduct::power(1);
  VarietyRealization v11(colligation_from_inner_pair(z1, z1));
  EXPECT_LE(verify_pair_on_variety(z1, z1, v11, 100, rng), 1e-14);

  auto z4 = BlaschkeProduct::power(4);
  VarietyRealization v24(colligation_from_inner_pair(z2, z4));
  EXPECT_LE(verify_pair_on_variety(z2, z4, v24, 100, rng), 1e-7);
  for (int t = 0; t < 20; ++t) {
    const Complex z = random_in_disk(rng, 0.9);
    EXPECT_LE(operator_norm(transfer(v24.colligation(), z) - z * z * CMatrix::Identity(2, 2)),
              1e-9);
  }

  auto mobius = BlaschkeProduct({0.5});
  VarietyRealization vm(colligation_from_inner_pair(z1, mobius));
  for (int t = 0; t < 100; ++t) {
    const Complex z = random_in_disk(rng, 0.95);
    EXPECT_LE(membership(vm, z, mobius(z)).residual, 1e-7);
  }
}

TEST(VerifyPair, GeneratedVarietiesAreDistinguished) {
  auto products = sample_products();
  products.push_back(BlaschkeProduct::power(3));
  products.push_back(BlaschkeProduct({0.5}));
  for (std::size_t i = 0; i < products.size(); ++i) {
    for (std::size_t j = 0; j < products.size(); ++j) {
      VarietyRealization v(colligation_from_inner_pair(products[i], products[j]));
      DistinguishedAudit audit = audit_distinguished(v, 16, 128);
      EXPECT_TRUE(audit.is_distinguished) << i << "," << j;
      EXPECT_LE(audit.worst_boundary_deviation, 1e-6);
    }
  }
}

TEST(VerifyPair, MonomialPairsMatchParametrization) {
  for (auto [a, b] : std::vector<std::pair<int, int>>{{2, 3}, {3, 2}, {2, 5}, {3, 4}}) {
    VarietyRealization v(
        colligation_from_inner_pair(BlaschkeProduct::power(a), BlaschkeProduct::power(b)));
    EXPECT_EQ(v.rank().first, a);
    EXPECT_EQ(v.rank().second, b);
    // zeta -> (zeta^a, zeta^b) covers V once, so z has a zeros and w has b
    EXPECT_EQ(count_zeroes(v, RationalInner::monomial(1, 0), 64), a);
    EXPECT_EQ(count_zeroes(v, RationalInner::monomial(0, 1), 64), b);
    EXPECT_EQ(count_zeroes(v, RationalInner::monomial(1, 1), 64), a + b);
  }
}

}  // namespace
}  // namespace divark
