#pragma once

// The transmitter/jammer covariance game on a stacked multi-satellite MIMO
// channel:
//
//   J(Q0, Q1) = log2 det(I + H0 Q0 H0^H P^{-1}),  P = H1 Q1 H1^H + kappa I,
//   max over tr(Q0) <= E0,  min over tr(Q1) <= E1.
//
// The solver alternates the transmitter's exact water-filling best response
// with a trace-projected mirror-gradient step for the jammer
// (Y = exp(log Q1 - eta G1), scaled back onto the trace ball). Because the
// transmitter response is exact, G1 evaluated there is the gradient of the
// convex value function min target phi(Q1) = max_{Q0} J, so the jammer step
// is plain mirror descent on phi and the iteration converges to the saddle
// point for small enough steps. A backtracking halving on eta guards the
// descent.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orbitduel/channel.hpp"
#include "orbitduel/errors.hpp"
#include "orbitduel/hermitian.hpp"

namespace orbitduel {

struct CovarianceMatrix {
  CMat matrix;
  double trace_budget = 0.0;
};

// PSD within round-off and trace within budget slack.
inline bool covariance_feasible(const CovarianceMatrix& q, double trace_slack = 1e-8) {
  if (q.matrix.rows() != q.matrix.cols()) return false;
  if (q.matrix.trace().real() > q.trace_budget * (1.0 + trace_slack)) return false;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(q.matrix));
  const double lmax = es.eigenvalues().maxCoeff();
  return es.eigenvalues().minCoeff() >= -1e-10 * std::max(lmax, 0.0) - 1e-300;
}

struct SolverConfig {
  double eta = 0.0;                  // jammer step size; 0 = auto 0.1 E1/||G1(0)||_F
  double tolerance = 0.0;            // Frobenius stop threshold; 0 = auto 1e-6 (E0+E1)
  int max_iterations = 2000;
  double waterfill_tol = 1e-10;      // relative tolerance on sum(p_i) = E0
  double eigenvalue_cutoff = 1e-14;  // relative dead-mode cutoff lambda_cut
  bool keep_history = false;
  bool jammer_first = false;         // order-swap experiment: jammer updates first
};

struct WaterfillResult {
  CovarianceMatrix q0;
  RVec mode_gains;        // eigenvalues of Gamma = H0^H P^-1 H0, descending
  RVec mode_powers;       // p_i = (mu - 1/lambda_i)_+
  double water_level = 0.0;
  int active_modes = 0;
  bool dead_channel = false;  // all modes below the eigenvalue cutoff
};

struct SolverIterate {
  int iteration = 0;
  CovarianceMatrix q0, q1;       // post-update iterates
  CMat interference_plus_noise;  // P(Q1 before this iteration's jammer step)
  CMat signal_cov;               // S = H0 Q0 H0^H at the fresh transmitter response
  CMat gradient;                 // G1 used for the jammer step
  double rate_bits = 0.0;
  double delta_q0 = 0.0, delta_q1 = 0.0;
};

struct GameSolution {
  CovarianceMatrix q0, q1;
  double rate_bits = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<SolverIterate> history;  // populated when SolverConfig::keep_history
  double best_response_gap_bits = 0.0;
  double jammer_stationarity = 0.0;
  double final_eta = 0.0;
};

struct SaddleDiagnostics {
  double best_response_gap_bits = 0.0;
  double stationarity_residual = 0.0;
};

struct DivergenceError : Error {
  std::vector<SolverIterate> history;
  explicit DivergenceError(const std::string& msg, std::vector<SolverIterate> h = {})
      : Error(msg), history(std::move(h)) {}
};

// P(Q1) = H1 Q1 H1^H + kappa I.
inline CMat interference_cov(const StackedChannel& h1, const CovarianceMatrix& q1,
                             double kappa_w) {
  if (q1.matrix.rows() != q1.matrix.cols() || h1.cols() != q1.matrix.rows())
    throw ShapeError("interference_cov: Q1 incompatible with H1");
  if (!(kappa_w > 0.0)) throw DomainError("interference_cov: kappa must be > 0");
  CMat p = h1.matrix * q1.matrix * h1.matrix.adjoint();
  p.diagonal().array() += kappa_w;
  return hermitize(p);
}

namespace detail {

inline CMat icov_raw(const CMat& h1, const CMat& q1, double kappa_w) {
  CMat p = h1 * q1 * h1.adjoint();
  p.diagonal().array() += kappa_w;
  return hermitize(p);
}

inline double logdet_llt(const CMat& m, const char* who) {
  Eigen::LLT<CMat> llt(m);
  if (llt.info() != Eigen::Success)
    throw SingularityError(std::string(who) + ": matrix not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(std::real(l(i, i)));
  return 2.0 * acc;
}

// Rate in bits from plain matrices (hot path, no re-validation).
inline double rate_bits_raw(const CMat& h0, const CMat& q0, const CMat& p) {
  const CMat s = h0 * q0 * h0.adjoint();
  const double nats = logdet_llt(hermitize(p + s), "rate") - logdet_llt(hermitize(p), "rate");
  return std::max(nats / std::numbers::ln2, 0.0);
}

// Water-filling over the eigenmodes of Gamma: find mu with
// sum_i (mu - 1/lambda_i)_+ = E0 by bisection, then Q0 = V diag(p) V^H.
inline WaterfillResult waterfill_gamma(const CMat& gamma, double e0,
                                       const SolverConfig& cfg) {
  Eigendecomposition d = eig_sorted_desc(hermitize(gamma));
  const Eigen::Index n = d.eigenvalues.size();

  WaterfillResult r;
  r.mode_gains = d.eigenvalues;
  r.mode_powers = RVec::Zero(n);
  r.q0.trace_budget = e0;

  const double lmax = d.eigenvalues(0);
  const double cut = cfg.eigenvalue_cutoff * std::max(lmax, 0.0);
  double inv_max = 0.0;
  int candidates = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.eigenvalues(i) > cut && d.eigenvalues(i) > 0.0) {
      inv_max = std::max(inv_max, 1.0 / d.eigenvalues(i));
      ++candidates;
    }
  }
  if (candidates == 0) {
    r.q0.matrix = CMat::Zero(n, n);
    r.dead_channel = true;
    return r;
  }

  auto poured = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (d.eigenvalues(i) > cut)
        s += std::max(mu - 1.0 / d.eigenvalues(i), 0.0);
    return s;
  };

  double lo = 0.0, hi = e0 + inv_max, mu = hi;
  const double tol = cfg.waterfill_tol * e0;
  for (int it = 0; it < 200; ++it) {
    mu = 0.5 * (lo + hi);
    const double t = poured(mu);
    if (std::abs(t - e0) <= tol) break;
    if (t > e0)
      hi = mu;
    else
      lo = mu;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.eigenvalues(i) > cut) {
      r.mode_powers(i) = std::max(mu - 1.0 / d.eigenvalues(i), 0.0);
      if (r.mode_powers(i) > 0.0) ++r.active_modes;
    }
  }
  r.water_level = mu;
  r.q0.matrix =
      hermitize(d.eigenvectors * r.mode_powers.asDiagonal() * d.eigenvectors.adjoint());
  return r;
}

inline WaterfillResult waterfill_raw(const CMat& h0, const CMat& p, double e0,
                                     const SolverConfig& cfg) {
  Eigen::LLT<CMat> llt(hermitize(p));
  if (llt.info() != Eigen::Success)
    throw SingularityError("waterfill_best_response: P not positive definite");
  const CMat gamma = h0.adjoint() * llt.solve(h0);
  return waterfill_gamma(gamma, e0, cfg);
}

inline CMat gradient_raw(const CMat& h0, const CMat& h1, const CMat& q0, const CMat& p) {
  const CMat s = h0 * q0 * h0.adjoint();
  Eigen::LLT<CMat> lp(hermitize(p));
  Eigen::LLT<CMat> lps(hermitize(p + s));
  if (lp.info() != Eigen::Success || lps.info() != Eigen::Success)
    throw SingularityError("jammer_gradient: P or P+S not positive definite");
  return hermitize(h1.adjoint() * (lps.solve(h1) - lp.solve(h1)));
}

// Orthonormal basis of the joint column space of [H0 H1]; the game only sees
// the receive space through that span (outside it P and P+S both equal
// kappa I and cancel), so the 180-row stacks collapse to rank <= 2M rows.
struct ReducedChannels {
  CMat h0, h1;
};

inline ReducedChannels reduce_receive_space(const CMat& h0, const CMat& h1) {
  const Eigen::Index k = h0.rows();
  const Eigen::Index n = h0.cols() + h1.cols();
  if (k <= n) return {h0, h1};
  CMat joint(k, n);
  joint << h0, h1;
  Eigen::ColPivHouseholderQR<CMat> qr(joint);
  qr.setThreshold(1e-12);
  Eigen::Index r = std::max<Eigen::Index>(qr.rank(), 1);
  const CMat basis = qr.householderQ() * CMat::Identity(k, r);
  return {basis.adjoint() * h0, basis.adjoint() * h1};
}

}  // namespace detail

// Eq-8 rate in bits/s/Hz, computed as logdet(P+S) - logdet(P).
inline double rate(const StackedChannel& h0, const CovarianceMatrix& q0, const CMat& p) {
  if (q0.matrix.rows() != q0.matrix.cols() || h0.cols() != q0.matrix.rows())
    throw ShapeError("rate: Q0 incompatible with H0");
  if (p.rows() != p.cols() || p.rows() != h0.rows())
    throw ShapeError("rate: P incompatible with H0");
  return detail::rate_bits_raw(h0.matrix, q0.matrix, p);
}

// Transmitter best response: water-filling on Gamma = H0^H P^{-1} H0.
inline WaterfillResult waterfill_best_response(const StackedChannel& h0, const CMat& p,
                                               double e0, const SolverConfig& cfg = {}) {
  if (!(e0 > 0.0)) throw DomainError("waterfill_best_response: E0 must be > 0");
  if (p.rows() != p.cols() || p.rows() != h0.rows())
    throw ShapeError("waterfill_best_response: P incompatible with H0");
  return detail::waterfill_raw(h0.matrix, p, e0, cfg);
}

// G1 = H1^H [(P+S)^{-1} - P^{-1}] H1. Negative semidefinite for PSD S.
inline CMat jammer_gradient(const StackedChannel& h0, const StackedChannel& h1,
                            const CovarianceMatrix& q0, const CovarianceMatrix& q1,
                            double kappa_w) {
  if (h0.rows() != h1.rows()) throw ShapeError("jammer_gradient: stacks disagree on rows");
  const CMat p = interference_cov(h1, q1, kappa_w);
  return detail::gradient_raw(h0.matrix, h1.matrix, q0.matrix, p);
}

// Mirror step on the PD cone with multiplicative trace projection:
// Y = exp(log Q1 - eta G1); Q1 <- Y if tr(Y) <= E1 else (E1/tr(Y)) Y.
// Large positive exponents are handled by a uniform eigenvalue shift before
// exponentiating: once tr(Y) is certain to exceed the budget the projected
// result is invariant to that shift, so it only prevents overflow.
inline CovarianceMatrix jammer_step(const CovarianceMatrix& q1, const CMat& g1, double eta,
                                    double e1) {
  if (!(eta > 0.0)) throw DomainError("jammer_step: eta must be > 0");
  if (!(e1 > 0.0)) throw DomainError("jammer_step: E1 must be > 0");
  if (g1.rows() != q1.matrix.rows() || g1.cols() != q1.matrix.cols())
    throw ShapeError("jammer_step: G1 shape mismatch");
  const CMat l = logm_hermitian(q1.matrix);
  const Eigendecomposition d = detail::eig_sorted_desc(hermitize(l - eta * g1));
  const double lmax = d.eigenvalues(0);
  const double shift = lmax > 300.0 ? lmax - 300.0 : 0.0;
  const RVec e = (d.eigenvalues.array() - shift).exp();
  const CMat y = hermitize(d.eigenvectors * e.asDiagonal() * d.eigenvectors.adjoint());
  const double tr = y.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw SingularityError("jammer_step: step produced a degenerate iterate");
  CovarianceMatrix out;
  out.trace_budget = e1;
  // shifted trace >= e^300, astronomically above any budget: always project
  out.matrix = (shift == 0.0 && tr <= e1) ? y : CMat((e1 / tr) * y);
  return out;
}

// Alternating best-response + projected mirror descent. Stops when
// ||dQ0||_F + ||dQ1||_F < tolerance (post-projection values).
inline GameSolution solve(const StackedChannel& h0, const StackedChannel& h1, double e0,
                          double e1, double kappa_w, const SolverConfig& cfg = {}) {
  if (h0.rows() != h1.rows()) throw ShapeError("solve: stacks disagree on receive rows");
  if (!(e0 > 0.0) || !(e1 > 0.0)) throw DomainError("solve: budgets must be positive");
  if (!(kappa_w > 0.0)) throw DomainError("solve: noise power must be positive");
  if (cfg.max_iterations < 1) throw DomainError("solve: max_iterations must be >= 1");

  const Eigen::Index n0 = h0.cols(), n1 = h1.cols();
  const auto [h0r, h1r] = detail::reduce_receive_space(h0.matrix, h1.matrix);
  const double eps = cfg.tolerance > 0.0 ? cfg.tolerance : 1e-6 * (e0 + e1);

  CovarianceMatrix q0{CMat::Identity(n0, n0) * (e0 / static_cast<double>(n0)), e0};
  CovarianceMatrix q1{CMat::Identity(n1, n1) * (e1 / static_cast<double>(n1)), e1};

  GameSolution sol;
  double eta = cfg.eta;
  double eta0 = cfg.eta;
  int clean_streak = 0;
  bool converged = false;
  int iters = 0;

  // One backtracked mirror step for the jammer against a fixed transmitter
  // response. `p` must be P(q1). Returns the accepted iterate and the rate
  // at (q0_fixed, accepted).
  auto jammer_update = [&](const CMat& p, const CovarianceMatrix& q0_fixed,
                           CMat& g1_out) -> std::pair<CovarianceMatrix, double> {
    const CMat s = h0r * q0_fixed.matrix * h0r.adjoint();
    g1_out = detail::gradient_raw(h0r, h1r, q0_fixed.matrix, p);
    const double j_cur = std::max(
        (detail::logdet_llt(hermitize(p + s), "rate") - detail::logdet_llt(p, "rate")) /
            std::numbers::ln2,
        0.0);
    if (eta <= 0.0) {
      const double gn = g1_out.norm();
      eta = gn > 0.0 ? 0.1 * e1 / gn : 1.0;
      eta0 = eta;
    }
    const double accept_slack = 1e-12 * (1.0 + std::abs(j_cur));
    for (int bt = 0; bt < 80; ++bt) {
      CovarianceMatrix cand = jammer_step(q1, g1_out, eta, e1);
      const CMat pc = detail::icov_raw(h1r, cand.matrix, kappa_w);
      double j_cand;
      try {
        j_cand = std::max((detail::logdet_llt(hermitize(pc + s), "rate") -
                           detail::logdet_llt(pc, "rate")) /
                              std::numbers::ln2,
                          0.0);
      } catch (const SingularityError&) {
        j_cand = std::numeric_limits<double>::quiet_NaN();
      }
      if (std::isfinite(j_cand) && j_cand <= j_cur + accept_slack) {
        if (bt == 0) {
          if (++clean_streak >= 3 && eta < eta0) {
            eta = std::min(eta * 2.0, eta0);
            clean_streak = 0;
          }
        } else {
          clean_streak = 0;
        }
        return {std::move(cand), j_cand};
      }
      eta *= 0.5;
    }
    return {q1, j_cur};  // step collapsed; hold position
  };

  for (int t = 0; t < cfg.max_iterations; ++t) {
    CovarianceMatrix q0_next, q1_next;
    CMat g1;
    double j_after = 0.0;
    const CMat p = detail::icov_raw(h1r, q1.matrix, kappa_w);

    if (!cfg.jammer_first) {
      WaterfillResult wf = detail::waterfill_raw(h0r, p, e0, cfg);
      q0_next = std::move(wf.q0);
      auto [q1n, j] = jammer_update(p, q0_next, g1);
      q1_next = std::move(q1n);
      j_after = j;
    } else {
      auto [q1n, j] = jammer_update(p, q0, g1);
      q1_next = std::move(q1n);
      const CMat p2 = detail::icov_raw(h1r, q1_next.matrix, kappa_w);
      WaterfillResult wf = detail::waterfill_raw(h0r, p2, e0, cfg);
      q0_next = std::move(wf.q0);
      j_after = detail::rate_bits_raw(h0r, q0_next.matrix, p2);
    }

    const double dq0 = (q0_next.matrix - q0.matrix).norm();
    const double dq1 = (q1_next.matrix - q1.matrix).norm();
    if (!std::isfinite(j_after) || !q0_next.matrix.allFinite() ||
        !q1_next.matrix.allFinite())
      throw DivergenceError("solve: non-finite iterate at t=" + std::to_string(t),
                            std::move(sol.history));

    if (cfg.keep_history) {
      SolverIterate rec;
      rec.iteration = t;
      rec.q0 = q0_next;
      rec.q1 = q1_next;
      rec.interference_plus_noise = interference_cov(h1, q1, kappa_w);
      rec.signal_cov = hermitize(h0.matrix * q0_next.matrix * h0.matrix.adjoint());
      rec.gradient = g1;
      rec.rate_bits = j_after;
      rec.delta_q0 = dq0;
      rec.delta_q1 = dq1;
      sol.history.push_back(std::move(rec));
    }

    q0 = std::move(q0_next);
    q1 = std::move(q1_next);
    iters = t + 1;
    if (dq0 + dq1 < eps) {
      converged = true;
      break;
    }
  }

  sol.q0 = std::move(q0);
  sol.q1 = std::move(q1);
  sol.iterations = iters;
  sol.converged = converged;
  sol.final_eta = eta > 0.0 ? eta : 0.0;

  const CMat pf = detail::icov_raw(h1r, sol.q1.matrix, kappa_w);
  sol.rate_bits = detail::rate_bits_raw(h0r, sol.q0.matrix, pf);

  WaterfillResult wf = detail::waterfill_raw(h0r, pf, e0, cfg);
  sol.best_response_gap_bits =
      detail::rate_bits_raw(h0r, wf.q0.matrix, pf) - sol.rate_bits;
  if (sol.q1.matrix.norm() > 0.0 && sol.final_eta > 0.0) {
    const CMat g1f = detail::gradient_raw(h0r, h1r, sol.q0.matrix, pf);
    const CovarianceMatrix stepped = jammer_step(sol.q1, g1f, sol.final_eta, e1);
    sol.jammer_stationarity =
        (stepped.matrix - sol.q1.matrix).norm() / sol.q1.matrix.norm();
  }
  return sol;
}

// Equilibrium quality of a converged solution: Danskin best-response gap of
// the transmitter and the relative displacement of one more jammer step.
inline SaddleDiagnostics saddle_check(const StackedChannel& h0, const StackedChannel& h1,
                                      const GameSolution& sol, double kappa_w, double e0,
                                      double e1, const SolverConfig& cfg = {}) {
  SaddleDiagnostics d;
  const CMat p = interference_cov(h1, sol.q1, kappa_w);
  const WaterfillResult wf = detail::waterfill_raw(h0.matrix, p, e0, cfg);
  const double j_star = detail::rate_bits_raw(h0.matrix, sol.q0.matrix, p);
  d.best_response_gap_bits = detail::rate_bits_raw(h0.matrix, wf.q0.matrix, p) - j_star;
  const double eta = sol.final_eta > 0.0 ? sol.final_eta : 1.0;
  if (sol.q1.matrix.norm() > 0.0) {
    const CMat g1 = detail::gradient_raw(h0.matrix, h1.matrix, sol.q0.matrix, p);
    const CovarianceMatrix stepped = jammer_step(sol.q1, g1, eta, e1);
    d.stationarity_residual =
        (stepped.matrix - sol.q1.matrix).norm() / sol.q1.matrix.norm();
  }
  return d;
}

}  // namespace orbitduel
