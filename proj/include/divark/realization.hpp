#pragma once

// Unitary colligations U = [[A, B], [C, D]] and their transfer functions
// Psi(z) = A + z B (I - z D)^{-1} C.

#include <string>
#include <vector>

#include "divark/substrate.hpp"

namespace divark {

/// A unitary (m+n)x(m+n) block matrix acting on C^m (+) C^n.
class Colligation {
 public:
  Colligation() = default;

  /// Splits U into blocks; throws NotUnitary if U*U or UU* is off by more
  /// than tol.unitary_tol.
  Colligation(const CMatrix& u, Eigen::Index m, const Tolerances& tol = {})
      : m_(m), n_(u.rows() - m) {
    if (u.rows() != u.cols() || m < 1 || n_ < 0) {
      throw Error(ErrorCode::InvalidInput, "colligation must be square with m >= 1");
    }
    if (!all_finite(u)) throw Error(ErrorCode::InvalidInput, "non-finite entry");
    const double defect = unitarity_defect(u);
    if (defect > tol.unitary_tol) {
      throw Error(ErrorCode::NotUnitary,
                  "unitarity defect " + std::to_string(defect));
    }
    u_ = u;
  }

  static Colligation from_blocks(const CMatrix& a, const CMatrix& b,
                                 const CMatrix& c, const CMatrix& d,
                                 const Tolerances& tol = {}) {
    const auto m = a.rows();
    const auto n = d.rows();
    if (a.cols() != m || b.rows() != m || b.cols() != n || c.rows() != n ||
        c.cols() != m || d.cols() != n) {
      throw Error(ErrorCode::InvalidInput, "inconsistent block sizes");
    }
    CMatrix u(m + n, m + n);
    u.topLeftCorner(m, m) = a;
    u.topRightCorner(m, n) = b;
    u.bottomLeftCorner(n, m) = c;
    u.bottomRightCorner(n, n) = d;
    return Colligation(u, m, tol);
  }

  Eigen::Index m() const { return m_; }
  Eigen::Index n() const { return n_; }
  const CMatrix& unitary() const { return u_; }

  CMatrix A() const { return u_.topLeftCorner(m_, m_); }
  CMatrix B() const { return u_.topRightCorner(m_, n_); }
  CMatrix C() const { return u_.bottomLeftCorner(n_, m_); }
  CMatrix D() const { return u_.bottomRightCorner(n_, n_); }

  bool operator==(const Colligation& other) const {
    return m_ == other.m_ && n_ == other.n_ && u_ == other.u_;
  }

 private:
  Eigen::Index m_ = 0;
  Eigen::Index n_ = 0;
  CMatrix u_;
};

struct TransferSample {
  Complex z;
  CMatrix psi;
  double defect_residual = 0.0;
};

/// Evaluates Psi(z) together with the residual of the defect identity
///   I - Psi*Psi = (1-|z|^2) C* (I - conj(z) D*)^{-1} (I - zD)^{-1} C.
inline TransferSample eval_transfer(const Colligation& col, Complex z) {
  if (std::abs(z) > 1.0 + 1e-12) {
    throw Error(ErrorCode::PreconditionFailed, "|z| > 1");
  }
  const auto m = col.m();
  const auto n = col.n();
  TransferSample out{z, col.A(), 0.0};
  CMatrix eye_m = CMatrix::Identity(m, m);
  if (n == 0) {
    out.defect_residual = operator_norm(eye_m - out.psi.adjoint() * out.psi);
    return out;
  }
  CMatrix resolvent_arg = CMatrix::Identity(n, n) - z * col.D();
  if (smallest_singular_value(resolvent_arg) <= 1e-12) {
    throw Error(ErrorCode::SingularResolvent, "I - zD is singular");
  }
  Eigen::PartialPivLU<CMatrix> lu(resolvent_arg);
  CMatrix x = lu.solve(col.C());  // (I - zD)^{-1} C
  out.psi += z * col.B() * x;
  CMatrix lhs = eye_m - out.psi.adjoint() * out.psi;
  CMatrix rhs = (1.0 - std::norm(z)) * x.adjoint() * x;
  out.defect_residual = operator_norm(lhs - rhs);
  return out;
}

inline CMatrix transfer(const Colligation& col, Complex z) {
  return eval_transfer(col, z).psi;
}

/// The colligation [[D*, B*], [C*, A*]] on C^n (+) C^m. Its variety, with the
/// coordinates exchanged, is the variety of `col`.
inline Colligation flip(const Colligation& col) {
  const auto m = col.m();
  const auto n = col.n();
  CMatrix u(m + n, m + n);
  u.topLeftCorner(n, n) = col.D().adjoint();
  u.topRightCorner(n, m) = col.B().adjoint();
  u.bottomLeftCorner(m, n) = col.C().adjoint();
  u.bottomRightCorner(m, m) = col.A().adjoint();
  // The blocks of a unitary rearranged this way are exactly unitary again;
  // validate with a loose bound so roundoff in the input never rejects.
  Tolerances loose;
  loose.unitary_tol = 1e-6;
  if (n == 0) {
    throw Error(ErrorCode::InvalidInput, "flip needs n >= 1");
  }
  return Colligation(u, n, loose);
}

struct PurityReport {
  double norm_A = 0.0;
  Eigen::Index ker_C_dim = 0;
  bool constant_unimodular_sheet = false;
};

inline PurityReport purity_report(const Colligation& col,
                                  const std::vector<Complex>& interior_grid,
                                  const Tolerances& tol = {}) {
  if (interior_grid.empty()) {
    throw Error(ErrorCode::PreconditionFailed, "empty grid");
  }
  PurityReport out;
  out.norm_A = operator_norm(col.A());
  out.ker_C_dim = col.m() - numerical_rank(col.C(), tol);
  bool every_point = true;
  for (Complex z : interior_grid) {
    if (std::abs(z) >= 1.0) {
      throw Error(ErrorCode::PreconditionFailed, "grid point outside the disk");
    }
    double top = 0.0;
    for (Complex w : general_eig(transfer(col, z))) top = std::max(top, std::abs(w));
    if (top < 1.0 - 1e-8) {
      every_point = false;
      break;
    }
  }
  out.constant_unimodular_sheet = every_point;
  return out;
}

/// Returns a unitary U with U X = Y, given Gram-consistent X and Y (p x k).
/// On range(X)^perp the completion maps a fixed orthonormal basis of
/// range(X)^perp onto one of range(Y)^perp; both bases come from Hermitian
/// eigendecompositions with the largest-magnitude-entry-positive convention.
inline CMatrix complete_to_unitary(const CMatrix& x, const CMatrix& y,
                                   const Tolerances& tol = {}) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::InvalidInput, "X and Y must have equal shapes");
  }
  const auto p = x.rows();
  const double xnorm = operator_norm(x);
  CMatrix gx = x.adjoint() * x;
  CMatrix gy = y.adjoint() * y;
  const double mismatch = operator_norm(gx - gy);
  if (mismatch > 1e-8 * (1.0 + xnorm * xnorm)) {
    throw Error(ErrorCode::GramMismatch,
                "||X*X - Y*Y|| = " + std::to_string(mismatch));
  }
  if (x.cols() == 0) return CMatrix::Identity(p, p);

  HermitianEig gram = hermitian_eig(0.5 * (gx + gy), tol);
  const Eigen::Index r = numerical_rank_psd(gram.values, tol);
  // leading eigenvalues sit at the end of the ascending list
  CMatrix w = gram.vectors.rightCols(r);
  RVector inv_sqrt = gram.values.tail(r).cwiseSqrt().cwiseInverse();
  CMatrix qx = x * w * inv_sqrt.asDiagonal();
  CMatrix qy = y * w * inv_sqrt.asDiagonal();

  auto complement = [&](const CMatrix& q) {
    CMatrix proj = CMatrix::Identity(p, p) - q * q.adjoint();
    HermitianEig e = hermitian_eig(0.5 * (proj + proj.adjoint()), tol);
    // eigenvalues near 1 span the complement; they are the last p - r
    return CMatrix(e.vectors.rightCols(p - r));
  };
  CMatrix px = complement(qx);
  CMatrix py = complement(qy);

  CMatrix u = qy * qx.adjoint() + py * px.adjoint();
  return nearest_unitary(u);
}

/// Haar-random colligation with blocks of size m and n.
inline Colligation random_colligation(Eigen::Index m, Eigen::Index n,
                                      std::mt19937_64& rng) {
  return Colligation(random_unitary(m + n, rng), m);
}

}  // namespace divark
