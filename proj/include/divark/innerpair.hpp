#pragma once

// Distinguished varieties generated by pairs of finite Blaschke products on
// the Hardy space of the disk.

#include <vector>

#include "divark/realization.hpp"
#include "divark/variety.hpp"

namespace divark {

/// c * prod (z - a) / (1 - conj(a) z).
class BlaschkeProduct {
 public:
  BlaschkeProduct(std::vector<Complex> zeros, Complex unimodular_constant = 1.0)
      : zeros_(std::move(zeros)), c_(unimodular_constant) {
    if (zeros_.empty()) {
      throw Error(ErrorCode::InvalidInput, "Blaschke product needs at least one zero");
    }
    for (Complex a : zeros_) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) ||
          std::abs(a) >= 1.0 - 1e-9) {
        throw Error(ErrorCode::InvalidInput, "Blaschke zero outside the disk");
      }
    }
    if (std::abs(std::abs(c_) - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidInput, "constant must be unimodular");
    }
  }

  /// z^d.
  static BlaschkeProduct power(int d) {
    return BlaschkeProduct(std::vector<Complex>(static_cast<std::size_t>(d), 0.0));
  }

  const std::vector<Complex>& zeros() const { return zeros_; }
  Complex unimodular_constant() const { return c_; }
  Eigen::Index degree() const { return static_cast<Eigen::Index>(zeros_.size()); }

  Complex operator()(Complex z) const {
    Complex acc = c_;
    for (Complex a : zeros_) acc *= (z - a) / (1.0 - std::conj(a) * z);
    return acc;
  }

 private:
  std::vector<Complex> zeros_;
  Complex c_;
};

/// Takenaka-Malmquist orthonormal basis of the model space H^2 minus phi H^2:
///   e_k(z) = sqrt(1 - |a_k|^2) / (1 - conj(a_k) z) * prod_{j<k} b_{a_j}(z).
/// Repeated zeros need no special case in this product form.
class ModelBasis {
 public:
  explicit ModelBasis(BlaschkeProduct source) : source_(std::move(source)) {}

  const BlaschkeProduct& source() const { return source_; }
  Eigen::Index dim() const { return source_.degree(); }

  /// Column (e_1(z), ..., e_dim(z)).
  CVector operator()(Complex z) const {
    const auto& a = source_.zeros();
    CVector out(dim());
    Complex partial = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const Complex denom = 1.0 - std::conj(a[k]) * z;
      out(static_cast<Eigen::Index>(k)) = std::sqrt(1.0 - std::norm(a[k])) / denom * partial;
      partial *= (z - a[k]) / denom;
    }
    return out;
  }

 private:
  BlaschkeProduct source_;
};

inline ModelBasis model_space_basis(const BlaschkeProduct& phi) { return ModelBasis(phi); }

/// Sample points spread over the circle of radius 0.8; the sample moment
/// matrix of polynomials below degree `count` is then a scaled DFT.
inline std::vector<Complex> default_inner_pair_samples(Eigen::Index m, Eigen::Index n) {
  const auto count = static_cast<std::size_t>(2 * (m + n) + 1);
  std::vector<Complex> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(std::polar(0.8, 2.0 * kPi * (static_cast<double>(k) + 0.25) /
                                      static_cast<double>(count)));
  }
  return out;
}

/// Unitary U on C^m (+) C^n, m = deg phi1, n = deg phi2, with
///   U (e(z), phi1(z) f(z)) = (phi2(z) e(z), f(z)),
/// e and f the model-space bases of phi1 and phi2.
inline Colligation colligation_from_inner_pair(const BlaschkeProduct& phi1,
                                               const BlaschkeProduct& phi2,
                                               const std::vector<Complex>& samples,
                                               const Tolerances& tol = {}) {
  const ModelBasis e(phi1);
  const ModelBasis f(phi2);
  const auto m = e.dim();
  const auto n = f.dim();
  const auto k = static_cast<Eigen::Index>(samples.size());
  CMatrix x(m + n, k);
  CMatrix y(m + n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Complex z = samples[static_cast<std::size_t>(j)];
    if (!(std::abs(z) < 1.0)) {
      throw Error(ErrorCode::InvalidInput, "sample outside the disk");
    }
    const CVector ez = e(z);
    const CVector fz = f(z);
    x.col(j) << ez, phi1(z) * fz;
    y.col(j) << phi2(z) * ez, fz;
  }
  if (k < m + n || numerical_rank(x, tol) < m + n) {
    throw Error(ErrorCode::RankDeficientSamples,
                "samples do not span C^" + std::to_string(m + n));
  }
  return Colligation(complete_to_unitary(x, y, tol), m, tol);
}

inline Colligation colligation_from_inner_pair(const BlaschkeProduct& phi1,
                                               const BlaschkeProduct& phi2,
                                               const Tolerances& tol = {}) {
  return colligation_from_inner_pair(
      phi1, phi2, default_inner_pair_samples(phi1.degree(), phi2.degree()), tol);
}

/// Largest membership residual of (phi1(z), phi2(z)) over random z, |z| <= 0.95.
inline double verify_pair_on_variety(const BlaschkeProduct& phi1,
                                     const BlaschkeProduct& phi2,
                                     const VarietyRealization& v, std::size_t trials,
                                     std::mt19937_64& rng) {
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Complex z = random_in_disk(rng, 0.95);
    worst = std::max(worst, membership(v, phi1(z), phi2(z)).residual);
  }
  return worst;
}

}  // namespace divark
