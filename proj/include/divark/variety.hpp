#pragma once

// Varieties V = {(z, w) in D^2 : det(Psi(z) - wI) = 0} generated by a
// colligation: membership, fibers, boundary traces, the distinguished-boundary
// audit and zero counting of regular rational inner functions on V.

#include <limits>
#include <numeric>
#include <vector>

#include "divark/polynomial.hpp"
#include "divark/realization.hpp"

namespace divark {

class VarietyRealization {
 public:
  /// Throws EmptyVariety when no fiber over a 16-point interior grid meets
  /// the open disk.
  explicit VarietyRealization(Colligation col, Tolerances tol = {})
      : col_(std::move(col)), tol_(tol) {
    tol_.validate();
    for (double r : {0.0, 0.3, 0.6, 0.9}) {
      for (int k = 0; k < 4; ++k) {
        const Complex z = std::polar(r, 2.0 * kPi * (k + 0.25) / 4.0);
        for (Complex w : general_eig(transfer(col_, z))) {
          if (std::abs(w) < 1.0 - 1e-9) return;
        }
      }
    }
    throw Error(ErrorCode::EmptyVariety, "no fiber meets the open disk");
  }

  const Colligation& colligation() const { return col_; }
  const Tolerances& tolerances() const { return tol_; }
  /// Sheets over a generic z and over a generic w.
  std::pair<Eigen::Index, Eigen::Index> rank() const { return {col_.m(), col_.n()}; }

 private:
  Colligation col_;
  Tolerances tol_;
};

struct Membership {
  bool inside = false;
  double residual = 0.0;
};

inline Membership membership(const VarietyRealization& v, Complex z, Complex w) {
  if (std::abs(z) >= 1.0 || std::abs(w) >= 1.0) {
    throw Error(ErrorCode::PreconditionFailed, "point outside the bidisk");
  }
  const CMatrix psi = transfer(v.colligation(), z);
  const auto m = psi.rows();
  const Complex det = (psi - w * CMatrix::Identity(m, m)).determinant();
  const double scale = std::pow(1.0 + operator_norm(psi), static_cast<double>(m));
  Membership out;
  out.residual = std::abs(det) / scale;
  out.inside = out.residual <= v.tolerances().membership_tol;
  return out;
}

/// The m points of V (with multiplicity) above z.
inline std::vector<Complex> fibers_over_z(const VarietyRealization& v, Complex z) {
  if (std::abs(z) > 1.0 + 1e-12) {
    throw Error(ErrorCode::PreconditionFailed, "|z| > 1");
  }
  return general_eig(transfer(v.colligation(), z));
}

namespace detail {

/// Reorders `next` so that it follows `prev` with minimal total displacement.
/// Exhaustive over permutations for up to six branches, greedy beyond.
inline std::vector<Complex> match_branches(const std::vector<Complex>& prev,
                                           std::vector<Complex> next) {
  const std::size_t m = prev.size();
  if (m <= 1) return next;
  if (m <= 6) {
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (std::size_t k = 0; k < m && cost < best_cost; ++k) {
        cost += std::abs(next[perm[k]] - prev[k]);
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<Complex> out(m);
    for (std::size_t k = 0; k < m; ++k) out[k] = next[best[k]];
    return out;
  }
  std::vector<Complex> out(m);
  std::vector<bool> used_prev(m, false), used_next(m, false);
  for (std::size_t round = 0; round < m; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (used_prev[i]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (used_next[j]) continue;
        const double d = std::abs(next[j] - prev[i]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    used_prev[bi] = used_next[bj] = true;
    out[bi] = next[bj];
  }
  return out;
}

inline double max_displacement(const std::vector<Complex>& a,
                               const std::vector<Complex>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace detail

/// Branches of V over the unit circle, sampled on a uniform theta grid.
struct BoundaryTrace {
  std::vector<double> thetas;
  std::vector<std::vector<Complex>> branches;  // G rows, m values each
  double continuity_defect = 0.0;

  std::size_t grid() const { return thetas.size(); }
  std::size_t branch_count() const { return branches.empty() ? 0 : branches.front().size(); }
};

namespace detail {

inline BoundaryTrace trace_once(const VarietyRealization& v, std::size_t g) {
  BoundaryTrace out;
  out.thetas.resize(g);
  out.branches.resize(g);
  for (std::size_t k = 0; k < g; ++k) {
    const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(g);
    out.thetas[k] = theta;
    auto fiber = fibers_over_z(v, std::polar(1.0, theta));
    if (k == 0) {
      std::sort(fiber.begin(), fiber.end(), [](Complex a, Complex b) {
        return std::arg(a) < std::arg(b);
      });
      out.branches[k] = std::move(fiber);
    } else {
      out.branches[k] = match_branches(out.branches[k - 1], std::move(fiber));
      out.continuity_defect = std::max(
          out.continuity_defect, max_displacement(out.branches[k - 1], out.branches[k]));
    }
  }
  return out;
}

}  // namespace detail

/// Displacement per step above which a trace is re-checked on finer grids.
inline constexpr double kTraceJumpThreshold = 0.5;

inline BoundaryTrace boundary_trace(const VarietyRealization& v, std::size_t g) {
  if (g < 64) throw Error(ErrorCode::PreconditionFailed, "trace grid must be >= 64");
  BoundaryTrace out = detail::trace_once(v, g);
  if (out.continuity_defect > kTraceJumpThreshold) {
    double previous = out.continuity_defect;
    for (std::size_t factor : {2u, 4u}) {
      const double refined = detail::trace_once(v, g * factor).continuity_defect;
      if (!(refined < previous)) {
        throw Error(ErrorCode::TraceUnstable,
                    "continuity defect does not shrink under refinement");
      }
      previous = refined;
    }
  }
  return out;
}

struct DistinguishedAudit {
  bool is_distinguished = false;
  double worst_interior_modulus = 0.0;
  double worst_boundary_deviation = 0.0;
};

/// Polar grid of size x size points with radii in [0, 0.95].
inline std::vector<Complex> interior_grid(std::size_t size) {
  std::vector<Complex> out;
  out.reserve(size * size);
  for (std::size_t i = 0; i < size; ++i) {
    const double r = 0.95 * static_cast<double>(i) / static_cast<double>(size - 1);
    for (std::size_t k = 0; k < size; ++k) {
      out.push_back(std::polar(r, 2.0 * kPi * (static_cast<double>(k) + 0.5) /
                                      static_cast<double>(size)));
    }
  }
  return out;
}

inline DistinguishedAudit audit_distinguished(const VarietyRealization& v,
                                              std::size_t interior_grid_size,
                                              std::size_t g) {
  if (interior_grid_size < 16 || g < 16) {
    throw Error(ErrorCode::PreconditionFailed, "grid sizes must be >= 16");
  }
  DistinguishedAudit out;
  bool any_inside = false;
  for (Complex z : interior_grid(interior_grid_size)) {
    for (Complex w : fibers_over_z(v, z)) {
      out.worst_interior_modulus = std::max(out.worst_interior_modulus, std::abs(w));
      if (std::abs(w) < 1.0) any_inside = true;
    }
  }
  if (!any_inside) throw Error(ErrorCode::EmptyVariety, "interior fibers avoid the disk");
  const BoundaryTrace trace = boundary_trace(v, std::max<std::size_t>(g, 64));
  for (const auto& row : trace.branches) {
    for (Complex w : row) {
      out.worst_boundary_deviation =
          std::max(out.worst_boundary_deviation, std::abs(std::abs(w) - 1.0));
    }
  }
  out.is_distinguished =
      out.worst_interior_modulus < 1.0 && out.worst_boundary_deviation < 1e-6;
  return out;
}

/// phi(z, w) = z^d1 w^d2 conj(p(1/conj z, 1/conj w)) / p(z, w) with p free of
/// zeros on the closed bidisk.
class RationalInner {
 public:
  RationalInner(BiPoly p, int d1, int d2) : p_(std::move(p)), d1_(d1), d2_(d2) {
    if (d1 < 0 || d2 < 0 || p_.degree_z() > d1 || p_.degree_w() > d2 ||
        p_.coeffs().empty()) {
      throw Error(ErrorCode::InvalidInput, "degree must dominate the degree of p");
    }
    std::map<BiPoly::Exponent, Complex> reflected;
    for (const auto& [e, c] : p_.coeffs()) {
      reflected[{d1 - e.first, d2 - e.second}] += std::conj(c);
    }
    reflected_ = BiPoly(std::move(reflected));
  }

  static RationalInner monomial(int d1, int d2) {
    return RationalInner(BiPoly::constant(1.0), d1, d2);
  }

  const BiPoly& p() const { return p_; }
  std::pair<int, int> degree() const { return {d1_, d2_}; }

  Complex operator()(Complex z, Complex w) const { return reflected_(z, w) / p_(z, w); }

  /// p_r(z, w) = p(rz, rw) with the same degree.
  RationalInner dilate(double r) const { return RationalInner(p_.dilate(r), d1_, d2_); }

  friend RationalInner operator*(const RationalInner& a, const RationalInner& b) {
    return RationalInner(a.p_ * b.p_, a.d1_ + b.d1_, a.d2_ + b.d2_);
  }

  /// Grid minimum of |p| on the closed bidisk (boundary refined) and the
  /// torus unimodularity check; throws NotRegular on failure.
  void check_regular() const {
    std::vector<Complex> disk;
    for (int i = 0; i < 8; ++i) {
      const double r = static_cast<double>(i) / 7.0;
      for (int k = 0; k < 8; ++k) disk.push_back(std::polar(r, 2.0 * kPi * k / 8.0));
    }
    double min_abs = std::numeric_limits<double>::infinity();
    for (Complex z : disk) {
      for (Complex w : disk) min_abs = std::min(min_abs, std::abs(p_(z, w)));
    }
    for (int a = 0; a < 128; ++a) {
      for (int b = 0; b < 128; ++b) {
        min_abs = std::min(min_abs, std::abs(p_(std::polar(1.0, 2.0 * kPi * a / 128.0),
                                                std::polar(1.0, 2.0 * kPi * b / 128.0))));
      }
    }
    if (!(min_abs > 1e-6 * p_.max_coeff())) {
      throw Error(ErrorCode::NotRegular, "p nearly vanishes on the closed bidisk");
    }
    for (int k = 0; k < 100; ++k) {
      const Complex z = std::polar(1.0, 0.37 + 2.0 * kPi * k / 100.0);
      const Complex w = std::polar(1.0, 1.91 + 2.0 * kPi * 7.0 * k / 100.0);
      if (std::abs(std::abs((*this)(z, w)) - 1.0) > 1e-8) {
        throw Error(ErrorCode::NotRegular, "phi is not unimodular on the torus");
      }
    }
  }

 private:
  BiPoly p_;
  BiPoly reflected_;
  int d1_ = 0;
  int d2_ = 0;
};

/// Number of zeros of phi on V, as the winding number over the circle of the
/// product of phi along all fibers (a single-valued function of theta).
inline long count_zeroes(const VarietyRealization& v, const RationalInner& phi,
                         std::size_t g) {
  phi.check_regular();
  if (g < 16) throw Error(ErrorCode::PreconditionFailed, "grid must be >= 16");
  constexpr std::size_t kMaxGrid = std::size_t{1} << 20;
  for (std::size_t grid = g; grid <= kMaxGrid; grid *= 2) {
    std::vector<Complex> product(grid);
    for (std::size_t k = 0; k < grid; ++k) {
      const Complex z = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) /
                                            static_cast<double>(grid));
      Complex acc = 1.0;
      double min_abs = std::numeric_limits<double>::infinity();
      for (Complex w : fibers_over_z(v, z)) {
        const Complex value = phi(z, w);
        min_abs = std::min(min_abs, std::abs(value));
        acc *= value;
      }
      if (!(min_abs > 1e-4)) {
        throw Error(ErrorCode::ZeroOnBoundary, "phi nearly vanishes on the boundary of V");
      }
      product[k] = acc;
    }
    double total = 0.0;
    double worst_step = 0.0;
    for (std::size_t k = 0; k < grid; ++k) {
      const double step = std::arg(product[(k + 1) % grid] / product[k]);
      worst_step = std::max(worst_step, std::abs(step));
      total += step;
    }
    if (worst_step < kPi / 4.0) return std::lround(total / (2.0 * kPi));
  }
  throw Error(ErrorCode::ConvergenceFailure, "winding number did not resolve");
}

}  // namespace divark
