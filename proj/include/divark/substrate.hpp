#pragma once

// Dense complex linear algebra and the tolerance policy shared by every
// other header in divark.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace divark {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Failure categories. Each maps onto a stable reason code used by the CLI.
enum class ErrorCode {
  InvalidInput,
  PreconditionFailed,
  NotHermitian,
  ConvergenceFailure,
  SingularResolvent,
  GramMismatch,
  NotUnitary,
  EmptyVariety,
  TraceUnstable,
  ZeroOnBoundary,
  NotRegular,
  RankDeficientSamples,
  NotDiagonalizable,
  UnimodularEigenvalue,
  IndefiniteGram,
  CertificateViolation,
  PerturbationFailed,
  NotPositiveDefinite,
  Inconclusive,
  NoActiveKernelFound,
  NullSpaceDegenerate,
  DegenerateFormula,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SingularResolvent: return "SingularResolvent";
    case ErrorCode::GramMismatch: return "GramMismatch";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::EmptyVariety: return "EmptyVariety";
    case ErrorCode::TraceUnstable: return "TraceUnstable";
    case ErrorCode::ZeroOnBoundary: return "ZeroOnBoundary";
    case ErrorCode::NotRegular: return "NotRegular";
    case ErrorCode::RankDeficientSamples: return "RankDeficientSamples";
    case ErrorCode::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorCode::UnimodularEigenvalue: return "UnimodularEigenvalue";
    case ErrorCode::IndefiniteGram: return "IndefiniteGram";
    case ErrorCode::CertificateViolation: return "CertificateViolation";
    case ErrorCode::PerturbationFailed: return "PerturbationFailed";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::NoActiveKernelFound: return "NoActiveKernelFound";
    case ErrorCode::NullSpaceDegenerate: return "NullSpaceDegenerate";
    case ErrorCode::DegenerateFormula: return "DegenerateFormula";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Numerical thresholds, threaded explicitly through every computation.
struct Tolerances {
  double unitary_tol = 1e-10;
  double psd_tol = 1e-9;
  double membership_tol = 1e-8;
  double rank_tol = 1e-10;  // relative to the largest eigenvalue
  double bisect_tol = 1e-4;

  void validate() const {
    if (!(unitary_tol > 0 && psd_tol > 0 && membership_tol > 0 &&
          rank_tol > 0 && bisect_tol > 0)) {
      throw Error(ErrorCode::InvalidInput, "tolerances must be positive");
    }
  }
};

inline bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        return false;
      }
    }
  }
  return true;
}

/// Largest singular value.
inline double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline double smallest_singular_value(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

struct HermitianEig {
  RVector values;   // ascending
  CMatrix vectors;  // columns are orthonormal eigenvectors
};

/// Rotate a vector so that its largest-magnitude entry is real positive.
inline void fix_phase(Eigen::Ref<CVector> v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // strict comparison with a small margin keeps the choice stable when two
    // entries tie up to roundoff
    if (std::abs(v(i)) > best_abs * (1.0 + 1e-12)) {
      best_abs = std::abs(v(i));
      best = i;
    }
  }
  if (best_abs > 0) v *= std::conj(v(best)) / best_abs;
}

inline HermitianEig hermitian_eig(const CMatrix& m, const Tolerances& tol = {}) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NotHermitian, "matrix is not square");
  }
  const double scale = std::max(operator_norm(m), 1e-300);
  const double asym = operator_norm(m - m.adjoint());
  if (asym > tol.unitary_tol * scale) {
    throw Error(ErrorCode::NotHermitian,
                "||M - M*|| = " + std::to_string(asym));
  }
  CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "Hermitian eigensolver");
  }
  HermitianEig out{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    fix_phase(out.vectors.col(j));
  }
  return out;
}

inline double min_eigenvalue(const CMatrix& herm) {
  if (herm.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (herm + herm.adjoint()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Roots of det(M - wI), with multiplicity.
inline std::vector<Complex> general_eig(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::InvalidInput, "general_eig needs a square matrix");
  }
  if (m.rows() == 0) return {};
  Eigen::ComplexEigenSolver<CMatrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "complex eigensolver");
  }
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// Number of eigenvalues above rank_tol times the largest one.
inline Eigen::Index numerical_rank_psd(const RVector& eigenvalues,
                                       const Tolerances& tol) {
  if (eigenvalues.size() == 0) return 0;
  const double top = eigenvalues.maxCoeff();
  if (top <= 0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) > tol.rank_tol * top) ++rank;
  }
  return rank;
}

/// Numerical rank of an arbitrary matrix through the eigenvalues of M*M.
inline Eigen::Index numerical_rank(const CMatrix& m, const Tolerances& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  RVector s2 = svd.singularValues().array().square();
  return numerical_rank_psd(s2, tol);
}

/// Deterministic Hermitian square root of a PSD matrix.
inline CMatrix hermitian_sqrt(const CMatrix& psd, const Tolerances& tol = {}) {
  HermitianEig eig = hermitian_eig(psd, tol);
  RVector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
}

/// Nearest unitary in the Frobenius sense (polar factor).
inline CMatrix nearest_unitary(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

inline double unitarity_defect(const CMatrix& u) {
  const auto n = u.rows();
  CMatrix eye = CMatrix::Identity(n, n);
  return std::max(operator_norm(u.adjoint() * u - eye),
                  operator_norm(u * u.adjoint() - eye));
}

// Sampling helpers shared by tests and tools.

inline CMatrix random_gaussian(Eigen::Index rows, Eigen::Index cols,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(n01(rng), n01(rng));
  }
  return m;
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
inline CMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  CMatrix g = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

/// Uniform point in the disk of the given radius.
inline Complex random_in_disk(std::mt19937_64& rng, double radius = 1.0) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double r = radius * std::sqrt(u01(rng));
  const double t = 2.0 * kPi * u01(rng);
  return std::polar(r, t);
}

}  // namespace divark
