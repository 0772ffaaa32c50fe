#pragma once

// Independent oracles for the min-max game tests. These deliberately avoid
// the solver's own code paths: rates are evaluated through explicit
// determinants, gradients through central finite differences, and optima
// through exhaustive grids.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "test_util.hpp"

namespace gameoracle {

using testutil::CMat;
using testutil::CVec;
using testutil::cxd;
using testutil::RVec;

// Natural-log rate ln det(P + S) - ln det(P) via LU, for finite differencing.
inline double rate_nats_lu(const CMat& h0, const CMat& q0, const CMat& h1,
                           const CMat& q1, double kappa) {
  const Eigen::Index k = h0.rows();
  CMat p = h1 * q1 * h1.adjoint();
  p.diagonal().array() += kappa;
  const CMat s = h0 * q0 * h0.adjoint();
  Eigen::PartialPivLU<CMat> lu_p(p);
  Eigen::PartialPivLU<CMat> lu_ps(CMat(p + s));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    acc += std::log(std::abs(lu_ps.matrixLU()(i, i))) -
           std::log(std::abs(lu_p.matrixLU()(i, i)));
  return acc;
}

// Central finite differences of the nats rate in Q1, assembled back into a
// Hermitian gradient matrix: tr(G (E_ij + E_ji)) = 2 Re G_ij and
// tr(G i(E_ij - E_ji)) = 2 Im G_ij.
inline CMat fd_jammer_gradient(const CMat& h0, const CMat& q0, const CMat& h1,
                               const CMat& q1, double kappa, double delta) {
  const Eigen::Index n = q1.rows();
  CMat g(n, n);
  auto eval = [&](const CMat& q) { return rate_nats_lu(h0, q0, h1, q, kappa); };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (i == j) {
        CMat e = CMat::Zero(n, n);
        e(i, i) = 1.0;
        g(i, i) = (eval(q1 + delta * e) - eval(q1 - delta * e)) / (2.0 * delta);
      } else {
        CMat er = CMat::Zero(n, n);
        er(i, j) = 1.0;
        er(j, i) = 1.0;
        CMat ei = CMat::Zero(n, n);
        ei(i, j) = cxd(0.0, 1.0);
        ei(j, i) = cxd(0.0, -1.0);
        const double dre = (eval(q1 + delta * er) - eval(q1 - delta * er)) / (2.0 * delta);
        const double dim = (eval(q1 + delta * ei) - eval(q1 - delta * ei)) / (2.0 * delta);
        g(i, j) = cxd(dre / 2.0, dim / 2.0);
        g(j, i) = std::conj(g(i, j));
      }
    }
  }
  return g;
}

// Best rate over diagonal power allocations in the eigenbasis of Gamma on a
// simplex grid with `steps` quanta of E0. The true water-filling optimum can
// only be better, so this is a valid lower bound at any resolution.
inline double grid_waterfill_rate(const RVec& lam, double e0, int steps) {
  const int n = static_cast<int>(lam.size());
  double best = 0.0;
  std::vector<int> alloc(n, 0);
  std::function<void(int, int)> rec = [&](int idx, int remaining) {
    if (idx == n - 1) {
      alloc[idx] = remaining;
      double r = 0.0;
      for (int i = 0; i < n; ++i)
        if (lam(i) > 0.0) r += std::log2(1.0 + (alloc[i] * e0 / steps) * lam(i));
      best = std::max(best, r);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      alloc[idx] = k;
      rec(idx + 1, remaining - k);
    }
  };
  rec(0, steps);
  return best;
}

// ---------------------------------------------------------------------------
// Exhaustive 2x2 saddle oracle.
//
// A 2x2 PSD matrix with trace E is parameterized by the eigenvalue split
// p in [0, E] and the eigenvector pair
//   u = (cos t, sin t e^{jf}),  v = (-sin t, cos t e^{jf}),
// giving Q = p u u^H + (E - p) v v^H. Both players use full trace at the
// saddle (the rate is monotone in either player's scale), so the grids live
// on the trace sphere.

struct ParamBox {
  double p_lo, p_hi;
  double t_lo, t_hi;
  double f_lo, f_hi;
};

struct GridPoint {
  CMat q;
  double p, t, f;
};

inline std::vector<GridPoint> psd_grid_2x2(double trace, const ParamBox& box, int np,
                                           int nt, int nf) {
  std::vector<GridPoint> out;
  out.reserve((np + 1) * (nt + 1) * (nf + 1));
  for (int ip = 0; ip <= np; ++ip) {
    const double p = box.p_lo + (box.p_hi - box.p_lo) * ip / np;
    for (int it = 0; it <= nt; ++it) {
      const double t = box.t_lo + (box.t_hi - box.t_lo) * it / nt;
      for (int jf = 0; jf <= nf; ++jf) {
        const double f = box.f_lo + (box.f_hi - box.f_lo) * jf / nf;
        CVec u(2), v(2);
        u << cxd(std::cos(t), 0.0), std::sin(t) * cxd(std::cos(f), std::sin(f));
        v << cxd(-std::sin(t), 0.0), std::cos(t) * cxd(std::cos(f), std::sin(f));
        CMat q = p * (u * u.adjoint()) + (trace - p) * (v * v.adjoint());
        out.push_back({0.5 * (q + q.adjoint()), p, t, f});
      }
    }
  }
  return out;
}

struct SaddleGridResult {
  double value = 0.0;  // min over Q1 grid of max over Q0 grid, bits
  GridPoint q1_arg, q0_arg;
};

inline SaddleGridResult saddle_grid_pass(const CMat& h0, const CMat& h1, double e0,
                                         double e1, double kappa, const ParamBox& box0,
                                         const ParamBox& box1, int np, int nt, int nf) {
  auto q0s = psd_grid_2x2(e0, box0, np, nt, nf);
  auto q1s = psd_grid_2x2(e1, box1, np, nt, nf);
  SaddleGridResult res;
  res.value = std::numeric_limits<double>::infinity();
  const Eigen::Index k = h0.rows();
  for (const auto& g1 : q1s) {
    CMat p = h1 * g1.q * h1.adjoint();
    p.diagonal().array() += kappa;
    const CMat a = h0.adjoint() * Eigen::LLT<CMat>(p).solve(h0);  // 2x2
    double mx = -1.0;
    const GridPoint* arg0 = nullptr;
    for (const auto& g0 : q0s) {
      const CMat m = CMat::Identity(2, 2) + g0.q * a;
      const double det = std::real(testutil::det2(m));
      const double j = std::log2(std::max(det, 1e-300));
      if (j > mx) {
        mx = j;
        arg0 = &g0;
      }
    }
    if (mx < res.value) {
      res.value = mx;
      res.q1_arg = g1;
      res.q0_arg = *arg0;
    }
  }
  (void)k;
  return res;
}

// Coarse pass over the full parameter ranges, then a refinement pass in a
// shrunken box around the coarse saddle.
inline double saddle_grid_value(const CMat& h0, const CMat& h1, double e0, double e1,
                                double kappa, int np = 14, int nt = 12, int nf = 16,
                                int passes = 2) {
  ParamBox box0{0.0, e0, 0.0, 0.5 * M_PI, 0.0, 2.0 * M_PI};
  ParamBox box1{0.0, e1, 0.0, 0.5 * M_PI, 0.0, 2.0 * M_PI};
  SaddleGridResult res;
  for (int pass = 0; pass < passes; ++pass) {
    res = saddle_grid_pass(h0, h1, e0, e1, kappa, box0, box1, np, nt, nf);
    auto shrink = [](const ParamBox& b, const GridPoint& at, double trace, int np_,
                     int nt_, int nf_) {
      const double wp = 1.5 * (b.p_hi - b.p_lo) / np_;
      const double wt = 1.5 * (b.t_hi - b.t_lo) / nt_;
      const double wf = 1.5 * (b.f_hi - b.f_lo) / nf_;
      ParamBox nb;
      nb.p_lo = std::max(0.0, at.p - wp);
      nb.p_hi = std::min(trace, at.p + wp);
      nb.t_lo = at.t - wt;
      nb.t_hi = at.t + wt;
      nb.f_lo = at.f - wf;
      nb.f_hi = at.f + wf;
      return nb;
    };
    box0 = shrink(box0, res.q0_arg, e0, np, nt, nf);
    box1 = shrink(box1, res.q1_arg, e1, np, nt, nf);
  }
  return res.value;
}

}  // namespace gameoracle
