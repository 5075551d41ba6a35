#pragma once

// Commuting contractive matrix pairs: spectral data, defect vectors, the
// colligation whose variety passes through the joint eigenvalues, and a
// numerical certificate of the polynomial norm bound on that variety.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "divark/polynomial.hpp"
#include "divark/realization.hpp"
#include "divark/variety.hpp"

namespace divark {

class CommutingPair {
 public:
  CommutingPair() = default;

  /// Throws InvalidInput unless T1, T2 are square, finite, commute and are
  /// contractions (all within 1e-10).
  CommutingPair(CMatrix t1, CMatrix t2) : t1_(std::move(t1)), t2_(std::move(t2)) {
    const auto n = t1_.rows();
    if (n < 1 || t1_.cols() != n || t2_.rows() != n || t2_.cols() != n) {
      throw Error(ErrorCode::InvalidInput, "T1 and T2 must be square of equal size");
    }
    if (!all_finite(t1_) || !all_finite(t2_)) {
      throw Error(ErrorCode::InvalidInput, "non-finite entry");
    }
    const double n1 = operator_norm(t1_);
    const double n2 = operator_norm(t2_);
    if (n1 > 1.0 + 1e-10 || n2 > 1.0 + 1e-10) {
      throw Error(ErrorCode::InvalidInput, "T1 and T2 must be contractions");
    }
    const double comm = operator_norm(t1_ * t2_ - t2_ * t1_);
    if (comm > 1e-10 * (1.0 + n1 * n2)) {
      throw Error(ErrorCode::InvalidInput,
                  "T1 and T2 do not commute: " + std::to_string(comm));
    }
  }

  Eigen::Index size() const { return t1_.rows(); }
  const CMatrix& t1() const { return t1_; }
  const CMatrix& t2() const { return t2_; }
  const CMatrix& t(int r) const { return r == 1 ? t1_ : t2_; }

 private:
  CMatrix t1_;
  CMatrix t2_;
};

struct SpectralData {
  std::vector<Complex> eigvals1;
  std::vector<Complex> eigvals2;
  CMatrix eigvecs;  // unit columns v_j
  double basis_condition = 1.0;

  std::size_t size() const { return eigvals1.size(); }
  const std::vector<Complex>& eigvals(int r) const { return r == 1 ? eigvals1 : eigvals2; }
};

inline double condition_number(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double low = s(s.size() - 1);
  return low > 0 ? s(0) / low : std::numeric_limits<double>::infinity();
}

inline double min_pairwise_gap(const std::vector<Complex>& values) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      gap = std::min(gap, std::abs(values[i] - values[j]));
    }
  }
  return gap;
}

/// A random unit vector (alpha, beta) in C^2.
inline std::array<Complex, 2> random_direction(std::mt19937_64& rng) {
  CMatrix g = random_gaussian(2, 1, rng);
  g /= g.norm();
  return {g(0, 0), g(1, 0)};
}

inline constexpr std::uint64_t kDefaultSeed = 0x5eedULL;

/// Simultaneous eigenbasis from a generic combination alpha T1 + beta T2.
inline SpectralData joint_eigensystem(const CommutingPair& pair,
                                      std::uint64_t seed = kDefaultSeed) {
  std::mt19937_64 rng(seed);
  const auto n = pair.size();
  constexpr int kAttempts = 5;
  std::optional<SpectralData> accepted;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const auto [alpha, beta] = random_direction(rng);
    CMatrix m = alpha * pair.t1() + beta * pair.t2();
    Eigen::ComplexEigenSolver<CMatrix> es(m);
    if (es.info() != Eigen::Success) continue;
    const auto& ev = es.eigenvalues();
    const bool distinct =
        min_pairwise_gap({ev.data(), ev.data() + ev.size()}) > 1e-8;
    SpectralData sd;
    sd.eigvecs = es.eigenvectors();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double len = sd.eigvecs.col(j).norm();
      if (len > 0) sd.eigvecs.col(j) /= len;
      fix_phase(sd.eigvecs.col(j));
    }
    sd.basis_condition = condition_number(sd.eigvecs);
    if (!(sd.basis_condition <= 1e8)) continue;
    bool residuals_ok = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      const CVector v = sd.eigvecs.col(j);
      for (int r : {1, 2}) {
        const CVector tv = pair.t(r) * v;
        const Complex lambda = v.dot(tv);  // Rayleigh quotient, v has unit norm
        if ((tv - lambda * v).norm() > 1e-8 * sd.basis_condition) residuals_ok = false;
        (r == 1 ? sd.eigvals1 : sd.eigvals2).push_back(lambda);
      }
    }
    if (!residuals_ok) continue;
    accepted = std::move(sd);
    // a collision in the combination leaves eigenspaces on which T1 and T2
    // might differ; only a collision-free combination settles the basis early
    if (distinct) break;
  }
  if (!accepted) {
    throw Error(ErrorCode::NotDiagonalizable, "no well conditioned joint eigenbasis");
  }
  for (int r : {1, 2}) {
    for (Complex l : accepted->eigvals(r)) {
      if (std::abs(l) >= 1.0 - 1e-8) {
        throw Error(ErrorCode::UnimodularEigenvalue,
                    "T" + std::to_string(r) + " has an eigenvalue of modulus 1");
      }
    }
  }
  return *accepted;
}

/// Columns u_j^r with <u_j^r, u_i^r> = (1 - conj(l_i) l_j) <v_j, v_i>.
struct DefectVectors {
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
  CMatrix u1;  // d1 x N
  CMatrix u2;  // d2 x N

  const CMatrix& u(int r) const { return r == 1 ? u1 : u2; }
};

/// G^r_ij = (1 - conj(l_i^r) l_j^r) <v_j, v_i>.
inline CMatrix defect_gram(const SpectralData& sd, int r) {
  const auto n = static_cast<Eigen::Index>(sd.size());
  const auto& l = sd.eigvals(r);
  CMatrix vg = sd.eigvecs.adjoint() * sd.eigvecs;  // (i, j) = <v_j, v_i>
  CMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      g(i, j) = (1.0 - std::conj(l[ui]) * l[uj]) * vg(i, j);
    }
  }
  return 0.5 * (g + g.adjoint());
}

/// Factor a PSD Gram matrix G = F* F with F of numerical-rank rows; rows are
/// ordered by decreasing eigenvalue.
inline CMatrix gram_factor(const CMatrix& g, const Tolerances& tol) {
  HermitianEig eig = hermitian_eig(g, tol);
  if (eig.values.size() > 0 && eig.values(0) < -1e-8) {
    throw Error(ErrorCode::IndefiniteGram,
                "Gram eigenvalue " + std::to_string(eig.values(0)));
  }
  const Eigen::Index rank = numerical_rank_psd(eig.values, tol);
  const auto n = g.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return eig.values(a) > eig.values(b);
  });
  CMatrix f(rank, n);
  for (Eigen::Index k = 0; k < rank; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    f.row(k) = std::sqrt(eig.values(src)) * eig.vectors.col(src).adjoint();
  }
  return f;
}

inline DefectVectors defect_vectors(const SpectralData& sd, const Tolerances& tol = {}) {
  DefectVectors out;
  out.u1 = gram_factor(defect_gram(sd, 1), tol);
  out.u2 = gram_factor(defect_gram(sd, 2), tol);
  out.d1 = out.u1.rows();
  out.d2 = out.u2.rows();
  return out;
}

/// The colligation U on C^d1 (+) C^d2 with
///   U (u_j^1, l_j^1 u_j^2) = (l_j^2 u_j^1, u_j^2).
inline Colligation ando_colligation(const DefectVectors& dv, const SpectralData& sd,
                                    const Tolerances& tol = {}) {
  const auto n = static_cast<Eigen::Index>(sd.size());
  if (dv.u1.cols() != n || dv.u2.cols() != n || dv.d1 < 1) {
    throw Error(ErrorCode::InvalidInput, "defect vectors do not match spectral data");
  }
  CMatrix x(dv.d1 + dv.d2, n);
  CMatrix y(dv.d1 + dv.d2, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    x.col(j) << dv.u1.col(j), sd.eigvals1[uj] * dv.u2.col(j);
    y.col(j) << sd.eigvals2[uj] * dv.u1.col(j), dv.u2.col(j);
  }
  return Colligation(complete_to_unitary(x, y, tol), dv.d1, tol);
}

/// The colligation with transfer function Phi(z) = Psi(conj z)*, i.e. U*.
inline Colligation conjugate_transfer(const Colligation& col) {
  Tolerances loose;
  loose.unitary_tol = 1e-6;
  return Colligation(col.unitary().adjoint(), col.m(), loose);
}

/// Everything certify needs that does not depend on the polynomial.
struct AndoPipeline {
  CommutingPair pair;
  SpectralData spectral;
  DefectVectors defects;
  Colligation colligation;
  std::optional<VarietyRealization> variety;
  BoundaryTrace trace;
  std::vector<double> node_residuals;
  std::size_t grid = 0;
  Tolerances tol;
};

inline AndoPipeline build_ando_pipeline(const CommutingPair& pair, std::size_t grid,
                                        const Tolerances& tol = {},
                                        std::uint64_t seed = kDefaultSeed) {
  tol.validate();
  if (grid < 64) throw Error(ErrorCode::PreconditionFailed, "grid must be >= 64");
  AndoPipeline out;
  out.pair = pair;
  out.grid = grid;
  out.tol = tol;
  out.spectral = joint_eigensystem(pair, seed);
  out.defects = defect_vectors(out.spectral, tol);
  out.colligation = ando_colligation(out.defects, out.spectral, tol);
  out.variety.emplace(out.colligation, tol);
  out.trace = boundary_trace(*out.variety, grid);
  for (std::size_t j = 0; j < out.spectral.size(); ++j) {
    out.node_residuals.push_back(
        membership(*out.variety, out.spectral.eigvals1[j], out.spectral.eigvals2[j]).residual);
  }
  return out;
}

struct AndoCertificate {
  BiPoly p;
  double lhs = 0.0;
  double rhs_variety = 0.0;
  double rhs_bidisk = 0.0;
  double margin = 0.0;
  double slack = 0.0;
  std::size_t grid = 0;
  double max_node_residual = 0.0;
  bool nodes_in_variety = false;
  /// Distance to the input when the pair was first moved by perturb_to_generic.
  double perturbation = 0.0;
};

namespace detail {

inline Complex to_torus(Complex w) {
  const double a = std::abs(w);
  return a > 0 ? w / a : Complex(1.0, 0.0);
}

struct TorusPoint {
  Complex z;
  Complex w;
};

/// max |p| over the spectrum of Psi(e^{i theta}), pushed onto the torus.
inline double trace_value(const AndoPipeline& pl, const BiPoly& p, double theta,
                          TorusPoint* best) {
  const Complex z = std::polar(1.0, theta);
  double top = -1.0;
  try {
    for (Complex w : general_eig(transfer(pl.colligation, z))) {
      const Complex wt = to_torus(w);
      const double val = std::abs(p(z, wt));
      if (val > top) {
        top = val;
        if (best) *best = {z, wt};
      }
    }
  } catch (const Error&) {
    // theta on the spectrum of D: the sampled neighbours cover it
  }
  return top;
}

/// Golden-section search for a larger value of trace_value near theta0.
inline TorusPoint refine_trace_max(const AndoPipeline& pl, const BiPoly& p, double theta0,
                                   double half_width) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = theta0 - half_width;
  double b = theta0 + half_width;
  TorusPoint best{};
  double best_val = trace_value(pl, p, theta0, &best);
  auto probe = [&](double t) {
    TorusPoint pt{};
    const double v = trace_value(pl, p, t, &pt);
    if (v > best_val) {
      best_val = v;
      best = pt;
    }
    return v;
  };
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  for (int it = 0; it < 40; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = probe(d);
    }
  }
  return best;
}

}  // namespace detail

/// Slack allowed between the sampled sup over the trace and ||p(T1, T2)||.
inline double certificate_slack(std::size_t grid) {
  return 1e-6 + 10.0 / static_cast<double>(grid);
}

/// The certificate quantities without the final comparison.
inline AndoCertificate evaluate_certificate(const AndoPipeline& pl, const BiPoly& p) {
  if (p.coeffs().size() > 1000) {
    throw Error(ErrorCode::PreconditionFailed, "more than 1000 coefficients");
  }
  AndoCertificate out;
  out.p = p;
  out.grid = pl.grid;
  out.slack = certificate_slack(pl.grid);
  out.lhs = operator_norm(p(pl.pair.t1(), pl.pair.t2()));

  // torus points contributed by V: every sampled trace point, plus local
  // maximizers around the largest samples
  std::vector<detail::TorusPoint> points;
  std::vector<std::pair<double, std::size_t>> row_max;
  for (std::size_t k = 0; k < pl.trace.grid(); ++k) {
    const Complex z = std::polar(1.0, pl.trace.thetas[k]);
    double top = 0.0;
    for (Complex w : pl.trace.branches[k]) {
      const Complex wt = detail::to_torus(w);
      points.push_back({z, wt});
      top = std::max(top, std::abs(p(z, wt)));
    }
    row_max.emplace_back(top, k);
  }
  const std::size_t refine = std::min<std::size_t>(8, row_max.size());
  std::partial_sort(row_max.begin(), row_max.begin() + static_cast<std::ptrdiff_t>(refine),
                    row_max.end(), [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  const double step = 2.0 * kPi / static_cast<double>(pl.trace.grid());
  for (std::size_t i = 0; i < refine; ++i) {
    points.push_back(
        detail::refine_trace_max(pl, p, pl.trace.thetas[row_max[i].second], step));
  }
  for (const auto& pt : points) out.rhs_variety = std::max(out.rhs_variety, std::abs(p(pt.z, pt.w)));

  // the bidisk sup over the same torus points and a G x G grid
  out.rhs_bidisk = out.rhs_variety;
  const std::size_t g = pl.grid;
  std::vector<Complex> circle(g);
  for (std::size_t k = 0; k < g; ++k) {
    circle[k] = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(g));
  }
  for (Complex z : circle) {
    const std::vector<Complex> in_w = p.restrict_to_z(z);
    for (Complex w : circle) {
      Complex acc = 0.0;
      for (auto it = in_w.rbegin(); it != in_w.rend(); ++it) acc = acc * w + *it;
      out.rhs_bidisk = std::max(out.rhs_bidisk, std::abs(acc));
    }
  }

  out.margin = out.rhs_variety - out.lhs;
  out.max_node_residual = 0.0;
  for (double r : pl.node_residuals) out.max_node_residual = std::max(out.max_node_residual, r);
  out.nodes_in_variety = out.max_node_residual <= pl.tol.membership_tol;
  return out;
}

inline bool certificate_holds(const AndoCertificate& c) { return c.lhs <= c.rhs_variety + c.slack; }

/// Throws CertificateViolation when ||p(T1, T2)|| exceeds the sup over V
/// by more than the slack.
inline AndoCertificate certify(const AndoPipeline& pl, const BiPoly& p) {
  AndoCertificate out = evaluate_certificate(pl, p);
  if (!certificate_holds(out)) {
    throw Error(ErrorCode::CertificateViolation,
                "||p(T1,T2)|| = " + std::to_string(out.lhs) + " exceeds " +
                    std::to_string(out.rhs_variety) + " + slack");
  }
  return out;
}

inline AndoCertificate certify(const CommutingPair& pair, const BiPoly& p, std::size_t grid,
                               const Tolerances& tol = {}) {
  return certify(build_ando_pipeline(pair, grid, tol), p);
}

namespace detail {

/// Coefficients c with sum_k c_k M^k = T, k < N, or nullopt when T is not a
/// polynomial in M to within roundoff.
inline std::optional<CVector> polynomial_in(const CMatrix& m, const CMatrix& t) {
  const auto n = m.rows();
  CMatrix powers(n * n, n);
  CMatrix p = CMatrix::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    powers.col(k) = Eigen::Map<const CVector>(p.data(), n * n);
    p = p * m;
  }
  const CVector target = Eigen::Map<const CVector>(t.data(), n * n);
  CVector c = powers.colPivHouseholderQr().solve(target);
  if ((powers * c - target).norm() > 1e-9 * (1.0 + target.norm())) return std::nullopt;
  return c;
}

inline CMatrix eval_matrix_poly(const CVector& c, const CMatrix& m) {
  const auto n = m.rows();
  CMatrix acc = CMatrix::Zero(n, n);
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) acc = acc * m + c(k) * CMatrix::Identity(n, n);
  return acc;
}

/// Distinct perturbations of size at most `size`, spread on a circle.
inline std::vector<Complex> spread_shifts(Eigen::Index n, double size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double phase = 2.0 * kPi * u01(rng);
  std::vector<Complex> out;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.push_back(std::polar(size * (0.5 + 0.5 * u01(rng)),
                             phase + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n)));
  }
  return out;
}

inline std::optional<CommutingPair> accept_perturbed(const CommutingPair& pair, CMatrix t1,
                                                     CMatrix t2, double eps) {
  for (CMatrix* t : {&t1, &t2}) {
    const double nrm = operator_norm(*t);
    if (nrm > 1.0) *t /= nrm;
  }
  if (operator_norm(t1 - pair.t1()) > eps || operator_norm(t2 - pair.t2()) > eps) {
    return std::nullopt;
  }
  try {
    CommutingPair out(std::move(t1), std::move(t2));
    SpectralData sd = joint_eigensystem(out);
    std::vector<Complex> combo;
    for (std::size_t j = 0; j < sd.size(); ++j) combo.push_back(sd.eigvals1[j] + 0.5 * sd.eigvals2[j]);
    if (min_pairwise_gap(sd.eigvals1) <= 1e-8 && min_pairwise_gap(sd.eigvals2) <= 1e-8 &&
        min_pairwise_gap(combo) <= 1e-8) {
      return std::nullopt;
    }
    return out;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// A nearby commuting pair with a joint eigenbasis and separated joint
/// eigenvalues. Diagonalizable inputs have their joint eigenvalues moved
/// apart; otherwise T1 and T2 are written as polynomials in a generic
/// combination M, whose Schur diagonal is then separated.
inline CommutingPair perturb_to_generic(const CommutingPair& pair, double eps,
                                        std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 1e-2)) {
    throw Error(ErrorCode::PreconditionFailed, "epsilon must lie in (0, 1e-2]");
  }
  const auto n = pair.size();
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::optional<SpectralData> sd;
    try {
      sd = joint_eigensystem(pair, seed + static_cast<std::uint64_t>(attempt));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotDiagonalizable && e.code() != ErrorCode::UnimodularEigenvalue) {
        throw;
      }
    }
    if (sd) {
      const CMatrix& v = sd->eigvecs;
      const CMatrix vinv = v.inverse();
      for (double size = 0.25 * eps / sd->basis_condition; size > 1e-14; size *= 0.5) {
        auto s1 = detail::spread_shifts(n, size, rng);
        auto s2 = detail::spread_shifts(n, size, rng);
        CVector d1(n), d2(n);
        for (Eigen::Index j = 0; j < n; ++j) {
          const auto uj = static_cast<std::size_t>(j);
          // pull eigenvalues slightly inward so none reaches the circle
          d1(j) = sd->eigvals1[uj] * (1.0 - size) + s1[uj];
          d2(j) = sd->eigvals2[uj] * (1.0 - size) + s2[uj];
        }
        CMatrix t1 = v * d1.asDiagonal() * vinv;
        CMatrix t2 = v * d2.asDiagonal() * vinv;
        if (auto out = detail::accept_perturbed(pair, std::move(t1), std::move(t2), eps)) {
          return *out;
        }
      }
      continue;
    }
    const auto [alpha, beta] = random_direction(rng);
    const CMatrix m = alpha * pair.t1() + beta * pair.t2();
    auto c1 = detail::polynomial_in(m, pair.t1());
    auto c2 = detail::polynomial_in(m, pair.t2());
    if (!c1 || !c2) continue;  // M derogatory for this direction
    Eigen::ComplexSchur<CMatrix> schur(m);
    if (schur.info() != Eigen::Success) continue;
    const CMatrix& q = schur.matrixU();
    const CMatrix r = schur.matrixT();
    const double scale = std::max(1.0, c1->cwiseAbs().sum() + c2->cwiseAbs().sum());
    for (double size = 0.25 * eps / scale; size > 1e-14; size *= 0.5) {
      auto shifts = detail::spread_shifts(n, size, rng);
      CMatrix rp = r;
      for (Eigen::Index k = 0; k < n; ++k) rp(k, k) += shifts[static_cast<std::size_t>(k)];
      const CMatrix mp = q * rp * q.adjoint();
      CMatrix t1 = (1.0 - size) * detail::eval_matrix_poly(*c1, mp);
      CMatrix t2 = (1.0 - size) * detail::eval_matrix_poly(*c2, mp);
      if (auto out = detail::accept_perturbed(pair, std::move(t1), std::move(t2), eps)) {
        return *out;
      }
    }
  }
  throw Error(ErrorCode::PerturbationFailed, "no generic pair found within epsilon");
}

/// S D1 S^-1, S D2 S^-1 with D_r diagonal in the disk, each scaled into the
/// unit ball; redrawn until no eigenvalue is within 1e-3 of the circle.
inline CommutingPair random_commuting_pair(Eigen::Index n, std::mt19937_64& rng) {
  for (;;) {
    CMatrix s = CMatrix::Identity(n, n) + 0.4 * random_gaussian(n, n, rng);
    if (condition_number(s) > 1e3) continue;
    const CMatrix sinv = s.inverse();
    std::array<CMatrix, 2> t;
    bool ok = true;
    for (auto& tr : t) {
      CVector d(n);
      for (Eigen::Index j = 0; j < n; ++j) d(j) = random_in_disk(rng, 0.95);
      tr = s * d.asDiagonal() * sinv;
      const double nrm = operator_norm(tr);
      if (nrm > 1.0) {
        tr /= nrm;
        d /= nrm;
      }
      if (d.cwiseAbs().maxCoeff() > 1.0 - 1e-3) ok = false;
    }
    if (ok) return CommutingPair(t[0], t[1]);
  }
}

}  // namespace divark
