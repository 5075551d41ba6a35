#pragma once

#include <initializer_list>
#include <map>
#include <utility>

#include "divark/substrate.hpp"

namespace divark {

/// Polynomial in two complex variables, sum of c_ij z^i w^j.
class BiPoly {
 public:
  using Exponent = std::pair<int, int>;
  using Terms = std::map<Exponent, Complex>;

  BiPoly() = default;
  BiPoly(std::initializer_list<Terms::value_type> terms) : BiPoly(Terms(terms)) {}
  explicit BiPoly(Terms coeffs) : coeffs_(std::move(coeffs)) {
    for (const auto& [e, c] : coeffs_) {
      if (e.first < 0 || e.second < 0) {
        throw Error(ErrorCode::InvalidInput, "negative exponent");
      }
    }
  }

  static BiPoly constant(Complex c) { return BiPoly({{{0, 0}, c}}); }
  static BiPoly monomial(int i, int j, Complex c = 1.0) {
    return BiPoly({{{i, j}, c}});
  }

  const std::map<Exponent, Complex>& coeffs() const { return coeffs_; }

  int degree_z() const {
    int d = 0;
    for (const auto& [e, c] : coeffs_) d = std::max(d, e.first);
    return d;
  }
  int degree_w() const {
    int d = 0;
    for (const auto& [e, c] : coeffs_) d = std::max(d, e.second);
    return d;
  }

  double coeff_l1() const {
    double s = 0.0;
    for (const auto& [e, c] : coeffs_) s += std::abs(c);
    return s;
  }
  double max_coeff() const {
    double s = 0.0;
    for (const auto& [e, c] : coeffs_) s = std::max(s, std::abs(c));
    return s;
  }

  Complex operator()(Complex z, Complex w) const {
    // coefficients of the univariate polynomial in w, then Horner in w
    std::vector<Complex> in_w(static_cast<std::size_t>(degree_w()) + 1, 0.0);
    std::vector<Complex> zpow(static_cast<std::size_t>(degree_z()) + 1, 1.0);
    for (std::size_t i = 1; i < zpow.size(); ++i) zpow[i] = zpow[i - 1] * z;
    for (const auto& [e, c] : coeffs_) {
      in_w[static_cast<std::size_t>(e.second)] += c * zpow[static_cast<std::size_t>(e.first)];
    }
    Complex acc = 0.0;
    for (auto it = in_w.rbegin(); it != in_w.rend(); ++it) acc = acc * w + *it;
    return acc;
  }

  /// Coefficients in w of p(z, .), lowest degree first.
  std::vector<Complex> restrict_to_z(Complex z) const {
    std::vector<Complex> in_w(static_cast<std::size_t>(degree_w()) + 1, 0.0);
    for (const auto& [e, c] : coeffs_) {
      in_w[static_cast<std::size_t>(e.second)] += c * std::pow(z, e.first);
    }
    return in_w;
  }

  /// p(T1, T2) summed monomial by monomial; assumes T1 and T2 commute.
  CMatrix operator()(const CMatrix& t1, const CMatrix& t2) const {
    const auto n = t1.rows();
    std::vector<CMatrix> p1{CMatrix::Identity(n, n)};
    std::vector<CMatrix> p2{CMatrix::Identity(n, n)};
    for (int i = 1; i <= degree_z(); ++i) p1.push_back(p1.back() * t1);
    for (int j = 1; j <= degree_w(); ++j) p2.push_back(p2.back() * t2);
    CMatrix acc = CMatrix::Zero(n, n);
    for (const auto& [e, c] : coeffs_) {
      acc += c * p1[static_cast<std::size_t>(e.first)] * p2[static_cast<std::size_t>(e.second)];
    }
    return acc;
  }

  /// p(r z, r w).
  BiPoly dilate(double r) const {
    std::map<Exponent, Complex> out;
    for (const auto& [e, c] : coeffs_) out[e] = c * std::pow(r, e.first + e.second);
    return BiPoly(std::move(out));
  }

  friend BiPoly operator*(const BiPoly& a, const BiPoly& b) {
    std::map<Exponent, Complex> out;
    for (const auto& [ea, ca] : a.coeffs_) {
      for (const auto& [eb, cb] : b.coeffs_) {
        out[{ea.first + eb.first, ea.second + eb.second}] += ca * cb;
      }
    }
    return BiPoly(std::move(out));
  }

 private:
  std::map<Exponent, Complex> coeffs_;
};

/// Polynomial of bidegree (dz, dw) with standard complex Gaussian coefficients.
inline BiPoly random_bipoly(int dz, int dw, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  BiPoly::Terms terms;
  for (int i = 0; i <= dz; ++i) {
    for (int j = 0; j <= dw; ++j) terms[{i, j}] = Complex(n01(rng), n01(rng));
  }
  return BiPoly(std::move(terms));
}

}  // namespace divark
