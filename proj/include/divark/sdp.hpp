#pragma once

// Primal-dual interior point method for small complex Hermitian semidefinite
// programs in block-diagonal standard form:
//
//   minimize <C, X>  subject to  <A_k, X> = b_k,  X >= 0,
//   maximize b'y     subject to  S = C - sum_k y_k A_k >= 0,
//
// with <P, Q> = Re tr(P Q) on Hermitian blocks. Search directions are the
// HKM directions with a Mehrotra predictor-corrector step.

#include <algorithm>
#include <limits>
#include <vector>

#include "divark/substrate.hpp"

namespace divark::sdp {

using Blocks = std::vector<CMatrix>;

inline double inner(const Blocks& p, const Blocks& q) {
  double s = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    s += (p[b].array() * q[b].conjugate().array()).sum().real();
  }
  return s;
}

inline double frobenius(const Blocks& p) { return std::sqrt(std::max(0.0, inner(p, p))); }

inline Blocks identity_blocks(const std::vector<Eigen::Index>& sizes, double scale) {
  Blocks out;
  for (auto s : sizes) out.push_back(scale * CMatrix::Identity(s, s));
  return out;
}

inline Blocks zero_blocks(const std::vector<Eigen::Index>& sizes) {
  return identity_blocks(sizes, 0.0);
}

struct Problem {
  std::vector<Eigen::Index> block_sizes;
  Blocks c;
  std::vector<Blocks> a;  // one Hermitian block list per constraint
  RVector b;
};

struct Options {
  int max_iterations = 100;
  double tolerance = 1e-10;
  int stall_limit = 4;  // iterations without improvement before giving up
};

struct Result {
  Blocks x;
  Blocks s;
  RVector y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline RVector apply_a(const Problem& p, const Blocks& x) {
  RVector out(static_cast<Eigen::Index>(p.a.size()));
  for (std::size_t k = 0; k < p.a.size(); ++k) out(static_cast<Eigen::Index>(k)) = inner(p.a[k], x);
  return out;
}

inline Blocks apply_at(const Problem& p, const RVector& y) {
  Blocks out = zero_blocks(p.block_sizes);
  for (std::size_t k = 0; k < p.a.size(); ++k) {
    const double yk = y(static_cast<Eigen::Index>(k));
    if (yk == 0.0) continue;
    for (std::size_t b = 0; b < out.size(); ++b) out[b] += yk * p.a[k][b];
  }
  return out;
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

/// Largest alpha with x + alpha dx >= 0 (infinity if unbounded).
inline double max_step(const Blocks& x, const Blocks& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < x.size(); ++b) {
    Eigen::LLT<CMatrix> llt(x[b]);
    if (llt.info() != Eigen::Success) return 0.0;
    CMatrix w = llt.matrixL().solve(dx[b]);
    w = llt.matrixL().solve(w.adjoint().eval()).adjoint();
    const double low = min_eigenvalue(hermitian_part(w));
    if (low < 0) alpha = std::min(alpha, -1.0 / low);
  }
  return alpha;
}

inline Blocks inverse_blocks(const Blocks& s) {
  Blocks out;
  for (const auto& blk : s) {
    Eigen::LLT<CMatrix> llt(blk);
    CMatrix inv = llt.solve(CMatrix::Identity(blk.rows(), blk.cols()));
    out.push_back(hermitian_part(inv));
  }
  return out;
}

}  // namespace detail

inline Result solve(const Problem& p, const Options& opt = {}) {
  const auto m = static_cast<Eigen::Index>(p.a.size());
  double n_total = 0.0;
  for (auto s : p.block_sizes) n_total += static_cast<double>(s);
  const double b_norm = p.b.norm();
  const double c_norm = frobenius(p.c);

  Result r;
  r.x = identity_blocks(p.block_sizes, 1.0);
  r.s = identity_blocks(p.block_sizes, 1.0);
  r.y = RVector::Zero(m);

  const std::size_t nb = p.block_sizes.size();
  // the residuals of the final iterates stagnate near the rounding floor and
  // can degrade again; the best iterate seen is returned
  Result best;
  double best_merit = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0; it <= opt.max_iterations; ++it) {
    r.iterations = it;
    const RVector rp = p.b - detail::apply_a(p, r.x);
    Blocks rd = p.c;
    {
      Blocks aty = detail::apply_at(p, r.y);
      for (std::size_t b = 0; b < nb; ++b) rd[b] -= r.s[b] + aty[b];
    }
    r.primal_objective = inner(p.c, r.x);
    r.dual_objective = p.b.dot(r.y);
    r.primal_infeasibility = rp.norm() / (1.0 + b_norm);
    r.dual_infeasibility = frobenius(rd) / (1.0 + c_norm);
    r.relative_gap = std::abs(r.primal_objective - r.dual_objective) /
                     (1.0 + std::abs(r.primal_objective) + std::abs(r.dual_objective));
    const double mu = inner(r.x, r.s) / n_total;
    const double merit = std::max({r.primal_infeasibility, r.dual_infeasibility, r.relative_gap});
    if (merit < best_merit) {
      best_merit = merit;
      best = r;
      since_best = 0;
    } else if (++since_best >= opt.stall_limit) {
      break;
    }
    if (merit <= opt.tolerance) break;
    if (it == opt.max_iterations) break;

    const Blocks sinv = detail::inverse_blocks(r.s);
    // Schur complement M_kl = <A_k, X A_l S^-1>
    std::vector<Blocks> xas(static_cast<std::size_t>(m));
    for (Eigen::Index l = 0; l < m; ++l) {
      auto& g = xas[static_cast<std::size_t>(l)];
      for (std::size_t b = 0; b < nb; ++b) {
        g.push_back(r.x[b] * p.a[static_cast<std::size_t>(l)][b] * sinv[b]);
      }
    }
    Eigen::MatrixXd schur(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index l = 0; l < m; ++l) {
        double s = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
          // Re tr(A_k G) with G = X A_l S^-1
          s += (p.a[static_cast<std::size_t>(k)][b].transpose().array() *
                xas[static_cast<std::size_t>(l)][b].array())
                   .sum()
                   .real();
        }
        schur(k, l) = s;
      }
    }
    schur = 0.5 * (schur + schur.transpose()).eval();
    Eigen::LDLT<Eigen::MatrixXd> factor(schur);
    if (factor.info() != Eigen::Success || !factor.isPositive()) {
      const double shift = 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      factor.compute(schur + shift * Eigen::MatrixXd::Identity(m, m));
      if (factor.info() != Eigen::Success) break;
    }

    Blocks xrds;
    for (std::size_t b = 0; b < nb; ++b) xrds.push_back(r.x[b] * rd[b] * sinv[b]);

    auto direction = [&](const Blocks& rc, RVector& dy, Blocks& dx, Blocks& ds) {
      Blocks t(nb);
      for (std::size_t b = 0; b < nb; ++b) t[b] = rc[b] - xrds[b];
      dy = factor.solve(rp - detail::apply_a(p, t));
      ds = rd;
      Blocks atdy = detail::apply_at(p, dy);
      for (std::size_t b = 0; b < nb; ++b) ds[b] -= atdy[b];
      dx.assign(nb, CMatrix());
      for (std::size_t b = 0; b < nb; ++b) {
        dx[b] = detail::hermitian_part(rc[b] - r.x[b] * ds[b] * sinv[b]);
      }
    };

    // predictor
    Blocks rc(nb);
    for (std::size_t b = 0; b < nb; ++b) rc[b] = -r.x[b];
    RVector dy;
    Blocks dx, ds;
    direction(rc, dy, dx, ds);
    const double ap = std::min(1.0, detail::max_step(r.x, dx));
    const double ad = std::min(1.0, detail::max_step(r.s, ds));
    Blocks xa = r.x, sa = r.s;
    for (std::size_t b = 0; b < nb; ++b) {
      xa[b] += ap * dx[b];
      sa[b] += ad * ds[b];
    }
    const double mu_aff = inner(xa, sa) / n_total;
    const double sigma = std::min(1.0, std::pow(mu_aff / mu, 3.0));

    // corrector
    for (std::size_t b = 0; b < nb; ++b) {
      rc[b] = sigma * mu * sinv[b] - r.x[b] - dx[b] * ds[b] * sinv[b];
    }
    direction(rc, dy, dx, ds);
    const double tau = 0.98;
    const double step_p = std::min(1.0, tau * detail::max_step(r.x, dx));
    const double step_d = std::min(1.0, tau * detail::max_step(r.s, ds));
    for (std::size_t b = 0; b < nb; ++b) {
      r.x[b] = detail::hermitian_part(r.x[b] + step_p * dx[b]);
      r.s[b] = detail::hermitian_part(r.s[b] + step_d * ds[b]);
    }
    r.y += step_d * dy;
  }
  best.converged = best_merit <= opt.tolerance;
  return best;
}

}  // namespace divark::sdp
