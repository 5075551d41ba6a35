#pragma once

// Pick interpolation on the bidisk: admissible kernels, solvability and the
// minimal interpolant norm, active kernels of extremal problems, and the
// extension of an active kernel to a distinguished variety through the nodes
// on which every norm-one interpolant takes the same values.

#include <array>
#include <optional>
#include <vector>

#include "divark/ando.hpp"
#include "divark/sdp.hpp"
#include "divark/variety.hpp"

namespace divark {

using Node = std::array<Complex, 2>;

class PickProblem {
 public:
  PickProblem() = default;

  PickProblem(std::vector<Node> nodes, std::vector<Complex> values)
      : nodes_(std::move(nodes)), values_(std::move(values)) {
    if (nodes_.empty() || nodes_.size() != values_.size()) {
      throw Error(ErrorCode::InvalidInput, "need as many values as nodes, at least one");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (Complex c : {nodes_[i][0], nodes_[i][1], values_[i]}) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
          throw Error(ErrorCode::InvalidInput, "non-finite entry");
        }
      }
      if (std::abs(nodes_[i][0]) >= 1.0 - 1e-9 || std::abs(nodes_[i][1]) >= 1.0 - 1e-9) {
        throw Error(ErrorCode::InvalidInput, "node outside the bidisk");
      }
      if (std::abs(values_[i]) > 1.0 + 1e-12) {
        throw Error(ErrorCode::InvalidInput, "value of modulus greater than 1");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(nodes_[i][0] - nodes_[j][0]) + std::abs(nodes_[i][1] - nodes_[j][1]) <
            1e-12) {
          throw Error(ErrorCode::InvalidInput, "repeated node");
        }
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Complex>& values() const { return values_; }

  std::vector<Complex> coordinate(int r) const {
    std::vector<Complex> out;
    for (const auto& n : nodes_) out.push_back(n[static_cast<std::size_t>(r - 1)]);
    return out;
  }

  /// The problem with node i removed.
  PickProblem without(std::size_t i) const {
    auto nodes = nodes_;
    auto values = values_;
    nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(i));
    values.erase(values.begin() + static_cast<std::ptrdiff_t>(i));
    return PickProblem(std::move(nodes), std::move(values));
  }

  /// Same nodes, values multiplied by s.
  PickProblem scaled(double s) const {
    auto values = values_;
    for (auto& v : values) v *= s;
    return PickProblem(nodes_, std::move(values));
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Complex> values_;
};

/// [1 - x_i conj(x_j)].
inline CMatrix pick_factor(const std::vector<Complex>& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  CMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = 1.0 - x[static_cast<std::size_t>(i)] * std::conj(x[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

/// [1 / (1 - x_i conj(x_j))].
inline CMatrix szego_matrix(const std::vector<Complex>& x) {
  return pick_factor(x).cwiseInverse();
}

struct KernelMatrix {
  CMatrix k;
  std::array<double, 2> residuals{};  // min eigenvalues of [(1 - l_i conj l_j) K_ij]
  bool admissible = false;
};

/// Throws InvalidInput unless K is Hermitian with unit diagonal, and
/// NotPositiveDefinite unless its smallest eigenvalue exceeds psd_tol.
inline KernelMatrix admissibility(const CMatrix& k, const PickProblem& prob,
                                  const Tolerances& tol = {}) {
  const auto n = static_cast<Eigen::Index>(prob.size());
  if (k.rows() != n || k.cols() != n) {
    throw Error(ErrorCode::InvalidInput, "kernel size does not match the problem");
  }
  if (operator_norm(k - k.adjoint()) > 1e-12 * (1.0 + operator_norm(k))) {
    throw Error(ErrorCode::InvalidInput, "kernel is not Hermitian");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(k(i, i) - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidInput, "kernel diagonal must be 1");
    }
  }
  const double low = min_eigenvalue(k);
  if (low <= tol.psd_tol) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "kernel eigenvalue " + std::to_string(low));
  }
  KernelMatrix out{k, {}, false};
  for (int r : {1, 2}) {
    out.residuals[static_cast<std::size_t>(r - 1)] =
        min_eigenvalue(pick_factor(prob.coordinate(r)).cwiseProduct(k));
  }
  out.admissible = out.residuals[0] >= -tol.psd_tol && out.residuals[1] >= -tol.psd_tol;
  return out;
}

/// [(1 - w_i conj(w_j)) K_ij].
inline CMatrix value_matrix(const CMatrix& k, const PickProblem& prob) {
  return pick_factor(prob.values()).cwiseProduct(k);
}

/// D K D with D = diag(K_ii^{-1/2}).
inline CMatrix unit_diagonal(const CMatrix& k) {
  RVector d = k.diagonal().real().cwiseSqrt().cwiseInverse();
  CMatrix out = d.asDiagonal() * k * d.asDiagonal();
  out = 0.5 * (out + out.adjoint());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, i) = 1.0;
  return out;
}

/// Solution of  min t  subject to  t - w_i conj(w_j) = a1_ij G1_ij + a2_ij G2_ij,
/// G1, G2 >= 0, with a_r = [1 - l^r_i conj(l^r_j)]. The optimum t is the
/// squared minimal norm of an interpolant; the dual yields an admissible
/// kernel (before normalization).
struct MinimalNorm {
  double t = 0.0;
  double rho = 0.0;
  CMatrix gamma1;
  CMatrix gamma2;
  CMatrix dual_kernel;  // satisfies both admissibility tests, diagonal not normalized
  sdp::Result solver;
};

namespace detail {

struct PickSdp {
  sdp::Problem problem;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;  // i <= j, in order
};

inline PickSdp build_pick_sdp(const PickProblem& prob) {
  const auto n = static_cast<Eigen::Index>(prob.size());
  const CMatrix a1 = pick_factor(prob.coordinate(1));
  const CMatrix a2 = pick_factor(prob.coordinate(2));
  const auto& w = prob.values();
  PickSdp out;
  auto& p = out.problem;
  p.block_sizes = {n, n, 1};
  p.c = sdp::zero_blocks(p.block_sizes);
  p.c[2](0, 0) = 1.0;
  std::vector<double> b;
  // Re(c X_ij) as <A, X>: A_ji = c/2, A_ij = conj(c)/2 off the diagonal
  auto functional = [&](Eigen::Index i, Eigen::Index j, Complex c) {
    CMatrix a = CMatrix::Zero(n, n);
    if (i == j) {
      a(i, i) = c.real();
    } else {
      a(j, i) = 0.5 * c;
      a(i, j) = 0.5 * std::conj(c);
    }
    return a;
  };
  const Complex minus_i(0.0, -1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      out.pairs.emplace_back(i, j);
      const Complex rhs = -w[static_cast<std::size_t>(i)] * std::conj(w[static_cast<std::size_t>(j)]);
      sdp::Blocks re{functional(i, j, a1(i, j)), functional(i, j, a2(i, j)),
                     CMatrix::Constant(1, 1, -1.0)};
      p.a.push_back(std::move(re));
      b.push_back(rhs.real());
      if (i != j) {
        sdp::Blocks im{functional(i, j, minus_i * a1(i, j)), functional(i, j, minus_i * a2(i, j)),
                       CMatrix::Zero(1, 1)};
        p.a.push_back(std::move(im));
        b.push_back(rhs.imag());
      }
    }
  }
  p.b = Eigen::Map<const RVector>(b.data(), static_cast<Eigen::Index>(b.size()));
  return out;
}

}  // namespace detail

/// Accuracy below which the interior point solution is not trusted.
inline constexpr double kSdpAcceptance = 1e-8;

inline MinimalNorm minimal_norm(const PickProblem& prob) {
  const auto n = static_cast<Eigen::Index>(prob.size());
  bool all_zero = true;
  for (Complex w : prob.values()) all_zero = all_zero && w == Complex(0.0);
  if (all_zero) {
    // the zero function; any kernel with unit mass is dual optimal
    MinimalNorm zero;
    zero.gamma1 = CMatrix::Zero(n, n);
    zero.gamma2 = CMatrix::Zero(n, n);
    zero.dual_kernel = szego_matrix(prob.coordinate(1)).cwiseProduct(szego_matrix(prob.coordinate(2)));
    zero.dual_kernel /= zero.dual_kernel.sum().real();
    zero.solver.converged = true;
    return zero;
  }
  const auto sdp_data = detail::build_pick_sdp(prob);
  MinimalNorm out;
  out.solver = sdp::solve(sdp_data.problem);
  const auto& s = out.solver;
  if (!s.converged && !(s.primal_infeasibility <= kSdpAcceptance &&
                        s.dual_infeasibility <= kSdpAcceptance &&
                        s.relative_gap <= kSdpAcceptance)) {
    throw Error(ErrorCode::Inconclusive,
                "interior point method stalled (gap " + std::to_string(s.relative_gap) + ")");
  }
  out.t = std::max(0.0, s.x[2](0, 0).real());
  out.rho = std::sqrt(out.t);
  out.gamma1 = s.x[0];
  out.gamma2 = s.x[1];
  // P = -Y with Y_ji = (y_re - i y_im)/2 for i < j and Y_ii = y_re; the
  // admissible kernel is conj(P)
  CMatrix y = CMatrix::Zero(n, n);
  Eigen::Index k = 0;
  for (const auto& [i, j] : sdp_data.pairs) {
    if (i == j) {
      y(i, i) = s.y(k++);
    } else {
      const Complex eta(s.y(k), -s.y(k + 1));
      k += 2;
      y(j, i) = 0.5 * eta;
      y(i, j) = 0.5 * std::conj(eta);
    }
  }
  out.dual_kernel = (-y).conjugate();
  return out;
}

/// Minimal sup norm of an interpolant (0 when every value is 0).
inline double extremal_rho(const PickProblem& prob) { return minimal_norm(prob).rho; }

inline bool is_extremal(double rho, const Tolerances& tol = {}) {
  return std::abs(rho - 1.0) <= tol.bisect_tol;
}

struct Decomposition {
  CMatrix gamma1;
  CMatrix gamma2;
  double identity_residual = 0.0;  // max_ij of the entrywise identity error
};

inline double decomposition_residual(const PickProblem& prob, const CMatrix& g1,
                                     const CMatrix& g2) {
  const CMatrix lhs = pick_factor(prob.values());
  const CMatrix rhs = pick_factor(prob.coordinate(1)).cwiseProduct(g1) +
                      pick_factor(prob.coordinate(2)).cwiseProduct(g2);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

inline CMatrix clip_psd(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  RVector v = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().adjoint();
}

struct SolvabilityReport {
  bool solvable = false;
  double rho = 0.0;
  std::optional<Decomposition> decomposition;
  std::optional<KernelMatrix> adversarial;
  double adversarial_min_eigenvalue = 0.0;
};

/// Decides solvability with a witness: PSD G1, G2 with
///   1 - w_i conj(w_j) = (1 - l1_i conj l1_j) G1_ij + (1 - l2_i conj l2_j) G2_ij,
/// or an admissible K whose value matrix has an eigenvalue below -1e-6.
inline SolvabilityReport check_solvable(const PickProblem& prob, const Tolerances& tol = {}) {
  const MinimalNorm mn = minimal_norm(prob);
  SolvabilityReport out;
  out.rho = mn.rho;
  if (mn.t <= 1.0 + 1e-9) {
    // raise t to 1 along the first coordinate, where a1 o S1 = J
    CMatrix g1 = clip_psd(mn.gamma1 + (1.0 - mn.t) * szego_matrix(prob.coordinate(1)));
    CMatrix g2 = clip_psd(mn.gamma2);
    const double res = decomposition_residual(prob, g1, g2);
    if (res <= 1e-7) {
      out.solvable = true;
      out.decomposition = Decomposition{std::move(g1), std::move(g2), res};
      return out;
    }
  } else {
    const CMatrix& k = mn.dual_kernel;
    if (k.diagonal().real().minCoeff() > 1e-12 * k.diagonal().real().maxCoeff()) {
      try {
        KernelMatrix km = admissibility(unit_diagonal(k), prob, tol);
        const double low = min_eigenvalue(value_matrix(km.k, prob));
        if (km.admissible && low < -1e-6) {
          out.adversarial = std::move(km);
          out.adversarial_min_eigenvalue = low;
          return out;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotPositiveDefinite) throw;
      }
    }
  }
  throw Error(ErrorCode::Inconclusive,
              "no decomposition and no adversarial kernel (t = " + std::to_string(mn.t) + ")");
}

/// Alternating projections with Dykstra's correction between the affine set of
/// the decomposition identity and the cone of PSD pairs. Returns nullopt when
/// the identity residual is still above 1e-7 after max_iterations.
inline std::optional<Decomposition> decompose_alternating(const PickProblem& prob,
                                                          int max_iterations = 100000) {
  const CMatrix a1 = pick_factor(prob.coordinate(1));
  const CMatrix a2 = pick_factor(prob.coordinate(2));
  const CMatrix c = pick_factor(prob.values());
  const CMatrix denom = a1.cwiseAbs2() + a2.cwiseAbs2();
  const auto n = c.rows();
  CMatrix x1 = CMatrix::Zero(n, n), x2 = CMatrix::Zero(n, n);
  CMatrix p1 = x1, p2 = x1, q1 = x1, q2 = x1;
  for (int it = 0; it < max_iterations; ++it) {
    // affine projection, entrywise
    CMatrix y1 = x1 + p1;
    CMatrix y2 = x2 + p2;
    const CMatrix gap = (c - a1.cwiseProduct(y1) - a2.cwiseProduct(y2)).cwiseQuotient(denom);
    CMatrix z1 = y1 + a1.conjugate().cwiseProduct(gap);
    CMatrix z2 = y2 + a2.conjugate().cwiseProduct(gap);
    p1 = y1 - z1;
    p2 = y2 - z2;
    // cone projection
    CMatrix u1 = z1 + q1;
    CMatrix u2 = z2 + q2;
    x1 = clip_psd(u1);
    x2 = clip_psd(u2);
    q1 = u1 - x1;
    q2 = u2 - x2;
    if (it % 64 == 63 && decomposition_residual(prob, x1, x2) <= 1e-8) break;
  }
  const double res = decomposition_residual(prob, x1, x2);
  if (res > 1e-7) return std::nullopt;
  return Decomposition{x1, x2, res};
}

struct ActiveKernel {
  KernelMatrix kernel;
  CVector gamma;
  double slack = 0.0;          // smallest eigenvalue of the value matrix
  double null_residual = 0.0;  // || value matrix * gamma ||
};

struct ActiveKernelSearch {
  bool found = false;
  ActiveKernel candidate;
};

/// Rotates gamma so its first entry of modulus above 1e-12 is real positive.
inline void fix_leading_phase(CVector& gamma) {
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    const double a = std::abs(gamma(i));
    if (a > 1e-12) {
      gamma *= std::conj(gamma(i)) / a;
      return;
    }
  }
}

/// Looks for an admissible K with a singular PSD value matrix. The candidate
/// is the kernel of the dual problem of the minimal-norm program at the given
/// values; a rank deficient candidate is mixed with the identity kernel.
inline ActiveKernelSearch search_active_kernel(const PickProblem& prob,
                                               const Tolerances& tol = {}) {
  const MinimalNorm mn = minimal_norm(prob);
  CMatrix k = mn.dual_kernel;
  const double top = k.diagonal().real().maxCoeff();
  CMatrix unit = top > 0 && k.diagonal().real().minCoeff() > 1e-12 * top
                     ? unit_diagonal(k)
                     : CMatrix::Identity(k.rows(), k.cols());
  if (min_eigenvalue(unit) <= tol.psd_tol) {
    unit = unit_diagonal(0.999 * unit + 0.001 * CMatrix::Identity(k.rows(), k.cols()));
  }
  ActiveKernelSearch out;
  out.candidate.kernel = admissibility(unit, prob, tol);
  HermitianEig eig = hermitian_eig(value_matrix(unit, prob), tol);
  out.candidate.slack = eig.values(0);
  out.candidate.gamma = eig.vectors.col(0);
  fix_leading_phase(out.candidate.gamma);
  out.candidate.null_residual = (value_matrix(unit, prob) * out.candidate.gamma).norm();
  out.found = out.candidate.kernel.admissible && std::abs(out.candidate.slack) <= tol.psd_tol &&
              out.candidate.null_residual <= 1e-6;
  return out;
}

/// Requires an extremal problem (|rho* - 1| <= bisect_tol).
inline ActiveKernel find_active_kernel(const PickProblem& prob, const Tolerances& tol = {}) {
  const double rho = extremal_rho(prob);
  if (!is_extremal(rho, tol)) {
    throw Error(ErrorCode::PreconditionFailed,
                "problem is not extremal (rho* = " + std::to_string(rho) + ")");
  }
  ActiveKernelSearch search = search_active_kernel(prob, tol);
  if (!search.found) {
    throw Error(ErrorCode::NoActiveKernelFound,
                "best slack " + std::to_string(search.candidate.slack));
  }
  return search.candidate;
}

struct MinimalityReport {
  bool minimal = false;
  std::vector<double> subproblem_rho;
};

/// Requires an extremal problem; minimal when no delete-one subproblem is.
inline MinimalityReport check_minimal(const PickProblem& prob, const Tolerances& tol = {}) {
  if (!is_extremal(extremal_rho(prob), tol)) {
    throw Error(ErrorCode::PreconditionFailed, "problem is not extremal");
  }
  MinimalityReport out;
  out.minimal = true;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double rho = prob.size() == 1 ? 0.0 : extremal_rho(prob.without(i));
    out.subproblem_rho.push_back(rho);
    if (!(rho < 1.0 - tol.bisect_tol)) out.minimal = false;
  }
  return out;
}

/// An active kernel carried to the variety of the colligation it generates.
/// The Gram vectors satisfy <v_j, v_i> = conj(K_ij), so that the extension
///   Khat(p, q) = <u1(p), u1(q)> / (1 - z_p conj(z_q))
/// restricts to K on the nodes.
class ExtendedKernel {
 public:
  ExtendedKernel(ActiveKernel base, PickProblem prob, const Tolerances& tol = {})
      : base_(std::move(base)), prob_(std::move(prob)), tol_(tol) {
    const CMatrix kbar = base_.kernel.k.conjugate();
    spectral_.eigvals1 = prob_.coordinate(1);
    spectral_.eigvals2 = prob_.coordinate(2);
    spectral_.eigvecs = hermitian_sqrt(kbar, tol_);
    spectral_.basis_condition = condition_number(spectral_.eigvecs);
    defects_ = defect_vectors(spectral_, tol_);
    colligation_ = ando_colligation(defects_, spectral_, tol_);
    variety_.emplace(colligation_, tol_);
  }

  const ActiveKernel& base() const { return base_; }
  const PickProblem& problem() const { return prob_; }
  const DefectVectors& node_defects() const { return defects_; }
  const Colligation& colligation() const { return colligation_; }
  const VarietyRealization& variety() const { return *variety_; }

  /// Index of the node at (z, w), if any.
  std::optional<std::size_t> node_index(Complex z, Complex w) const {
    for (std::size_t j = 0; j < prob_.size(); ++j) {
      if (std::abs(z - prob_.nodes()[j][0]) <= 1e-12 && std::abs(w - prob_.nodes()[j][1]) <= 1e-12) {
        return j;
      }
    }
    return std::nullopt;
  }

  /// First d1 components of a null vector of [[A - wI, zB], [C, zD - I]],
  /// scaled to norm sqrt(1 - |z|^2); the stored u_j^1 at the nodes.
  CVector u1(Complex z, Complex w) const {
    if (auto j = node_index(z, w)) return defects_.u1.col(static_cast<Eigen::Index>(*j));
    const auto d1 = colligation_.m();
    const auto d2 = colligation_.n();
    CMatrix q(d1 + d2, d1 + d2);
    q.topLeftCorner(d1, d1) = colligation_.A() - w * CMatrix::Identity(d1, d1);
    q.topRightCorner(d1, d2) = z * colligation_.B();
    q.bottomLeftCorner(d2, d1) = colligation_.C();
    q.bottomRightCorner(d2, d2) = z * colligation_.D() - CMatrix::Identity(d2, d2);
    Eigen::JacobiSVD<CMatrix> svd(q, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s(s.size() - 2) < 1e-8) {
      throw Error(ErrorCode::NullSpaceDegenerate, "null space of dimension above 1");
    }
    CVector u = svd.matrixV().col(s.size() - 1).head(d1);
    const double len = u.norm();
    if (len < 1e-12) {
      throw Error(ErrorCode::NullSpaceDegenerate, "null vector has no C^d1 part");
    }
    u *= std::sqrt(1.0 - std::norm(z)) / len;
    fix_phase(u);
    return u;
  }

  /// Khat(p, q) = u1(q)* u1(p) / (1 - z_p conj(z_q)).
  Complex operator()(const Node& p, const Node& q) const {
    return u1(q[0], q[1]).dot(u1(p[0], p[1])) / (1.0 - p[0] * std::conj(q[0]));
  }

  /// max_ij |Khat(l_i, l_j) - K_ij|.
  double restriction_residual() const {
    double worst = 0.0;
    const auto& nodes = prob_.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const Complex kij = base_.kernel.k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        worst = std::max(worst, std::abs((*this)(nodes[i], nodes[j]) - kij));
      }
    }
    return worst;
  }

  /// Smallest eigenvalues of [Khat], [(1 - z_i conj z_j) Khat] and
  /// [(1 - w_i conj w_j) Khat] over the given points of V.
  std::array<double, 3> sampled_admissibility(const std::vector<Node>& points) const {
    const auto n = static_cast<Eigen::Index>(points.size());
    std::vector<CVector> u;
    for (const auto& p : points) u.push_back(u1(p[0], p[1]));
    CMatrix k(n, n);
    std::vector<Complex> zs, ws;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = points[static_cast<std::size_t>(i)];
      zs.push_back(p[0]);
      ws.push_back(p[1]);
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto& q = points[static_cast<std::size_t>(j)];
        k(i, j) = u[static_cast<std::size_t>(j)].dot(u[static_cast<std::size_t>(i)]) /
                  (1.0 - p[0] * std::conj(q[0]));
      }
    }
    k = 0.5 * (k + k.adjoint());
    return {min_eigenvalue(k), min_eigenvalue(pick_factor(zs).cwiseProduct(k)),
            min_eigenvalue(pick_factor(ws).cwiseProduct(k))};
  }

 private:
  ActiveKernel base_;
  PickProblem prob_;
  Tolerances tol_;
  SpectralData spectral_;
  DefectVectors defects_;
  Colligation colligation_;
  std::optional<VarietyRealization> variety_;
};

inline ExtendedKernel extend_kernel(const ActiveKernel& ak, const PickProblem& prob,
                                    const Tolerances& tol = {}) {
  return ExtendedKernel(ak, prob, tol);
}

struct UniquenessValue {
  Complex value;
  Complex numerator;
  Complex denominator;
};

/// w = sum_j Khat(q, l_j) g_j / sum_j conj(w_j) Khat(q, l_j) g_j at a point q
/// of V. The problem is expected to be minimal; gamma must have no zero entry.
inline UniquenessValue uniqueness_value(const ExtendedKernel& ek, const CVector& gamma,
                                        const Node& query) {
  const auto& prob = ek.problem();
  if (gamma.size() != static_cast<Eigen::Index>(prob.size())) {
    throw Error(ErrorCode::InvalidInput, "gamma has the wrong length");
  }
  if (gamma.cwiseAbs().minCoeff() <= 1e-9 * gamma.norm()) {
    throw Error(ErrorCode::PreconditionFailed, "gamma has a zero component (problem not minimal)");
  }
  if (!membership(ek.variety(), query[0], query[1]).inside) {
    throw Error(ErrorCode::PreconditionFailed, "query point is not on the variety");
  }
  UniquenessValue out{0.0, 0.0, 0.0};
  double scale = 0.0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    const Complex term = ek(query, prob.nodes()[j]) * gamma(static_cast<Eigen::Index>(j));
    out.numerator += term;
    out.denominator += std::conj(prob.values()[j]) * term;
    scale += std::abs(term);
  }
  if (std::abs(out.denominator) <= 1e-9 * scale) {
    throw Error(ErrorCode::DegenerateFormula, "denominator vanishes at the query point");
  }
  out.value = out.numerator / out.denominator;
  return out;
}

// Random data for property checks.

/// N nodes uniform in the bidisk of radius 0.8 and values uniform in the disk.
inline PickProblem random_pick_problem(std::size_t n, std::mt19937_64& rng) {
  std::vector<Node> nodes;
  std::vector<Complex> values;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({random_in_disk(rng, 0.8), random_in_disk(rng, 0.8)});
    values.push_back(random_in_disk(rng, 1.0));
  }
  return PickProblem(std::move(nodes), std::move(values));
}

/// Unit-diagonal normalization of S1 o S2 o P with P a random positive
/// definite matrix; both admissibility tests hold since a_r o S_r = J.
inline CMatrix random_admissible_kernel(const PickProblem& prob, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(prob.size());
  CMatrix g = random_gaussian(n, n, rng);
  CMatrix p = g * g.adjoint() + 1e-3 * CMatrix::Identity(n, n);
  CMatrix k = szego_matrix(prob.coordinate(1))
                  .cwiseProduct(szego_matrix(prob.coordinate(2)))
                  .cwiseProduct(p);
  return unit_diagonal(k);
}

}  // namespace divark
