#pragma once

// Complex Hermitian matrix kernels used by the beamforming game solver:
// eigendecomposition, log-det, matrix exponential/logarithm on the Hermitian
// cone, and effective rank. Dense algorithms only; solver dimensions stay
// small (<= 180).

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "orbitduel/errors.hpp"

namespace orbitduel {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline bool all_finite(const CMat& m) {
  return m.allFinite();
}

inline double frobenius(const CMat& m) {
  return m.norm();
}

// Relative Hermitian-symmetry test: ||M - M^H||_F <= tol * max(1, ||M||_F).
inline bool is_hermitian(const CMat& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double asym = (m - m.adjoint()).norm();
  return asym <= tol * std::max(1.0, m.norm());
}

// (M + M^H)/2. Repeated products accumulate asymmetry at round-off level;
// every eigensolve goes through this first.
inline CMat hermitize(const CMat& m) {
  return 0.5 * (m + m.adjoint());
}

struct Eigendecomposition {
  RVec eigenvalues;   // real, sorted descending
  CMat eigenvectors;  // unitary; column i pairs with eigenvalues[i]
};

namespace detail {

inline void check_hermitian_input(const CMat& m, const char* op) {
  if (m.rows() != m.cols())
    throw ShapeError(std::string(op) + ": matrix must be square");
  if (!all_finite(m))
    throw DomainError(std::string(op) + ": matrix has non-finite entries");
  if (!is_hermitian(m))
    throw SymmetryError(std::string(op) + ": matrix is not Hermitian within tolerance");
}

// Eigensolve of an already-validated Hermitian matrix, eigenvalues descending.
inline Eigendecomposition eig_sorted_desc(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m));
  if (es.info() != Eigen::Success)
    throw SingularityError("eig_hermitian: eigensolver failed to converge");
  Eigendecomposition d;
  d.eigenvalues = es.eigenvalues().reverse();
  d.eigenvectors = es.eigenvectors().rowwise().reverse();
  return d;
}

}  // namespace detail

inline Eigendecomposition eig_hermitian(const CMat& m) {
  detail::check_hermitian_input(m, "eig_hermitian");
  return detail::eig_sorted_desc(m);
}

// log det(M) in nats for positive definite M, via Cholesky. Divide by ln 2
// for bits.
inline double logdet(const CMat& m) {
  detail::check_hermitian_input(m, "logdet");
  Eigen::LLT<CMat> llt(hermitize(m));
  if (llt.info() != Eigen::Success)
    throw SingularityError("logdet: matrix is not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = std::real(l(i, i));
    if (!(d > 0.0) || !std::isfinite(d))
      throw SingularityError("logdet: non-positive Cholesky pivot");
    acc += std::log(d);
  }
  return 2.0 * acc;
}

// exp(M) = V diag(exp lambda_i) V^H; positive definite by construction.
// Exponent eigenvalues are clamped at 700 so an aggressive mirror step
// saturates instead of overflowing; the trace projection downstream maps
// such saturated iterates back onto the feasible set.
inline CMat expm_hermitian(const CMat& m) {
  detail::check_hermitian_input(m, "expm_hermitian");
  Eigendecomposition d = detail::eig_sorted_desc(m);
  RVec e = d.eigenvalues.unaryExpr(
      [](double x) { return std::exp(std::min(x, 700.0)); });
  return hermitize(d.eigenvectors * e.asDiagonal() * d.eigenvectors.adjoint());
}

// Matrix logarithm on the PD cone. Iterates of the jammer covariance are PD
// analytically but finite precision can leave tiny negative eigenvalues, so
// eigenvalues are floored at 1e-12 * lambda_max by default, which keeps the
// mirror step defined. With flooring disabled, any eigenvalue below the
// floor is an error.
inline CMat logm_hermitian(const CMat& m, bool floor_small_eigenvalues = true) {
  detail::check_hermitian_input(m, "logm_hermitian");
  Eigendecomposition d = detail::eig_sorted_desc(m);
  const double lmax = d.eigenvalues(0);
  if (!(lmax > 0.0))
    throw SingularityError("logm_hermitian: matrix has no positive eigenvalue");
  const double floor = 1e-12 * lmax;
  RVec lam = d.eigenvalues;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < floor) {
      if (!floor_small_eigenvalues)
        throw SingularityError("logm_hermitian: eigenvalue below PD floor");
      lam(i) = floor;
    }
  }
  RVec loglam = lam.array().log();
  return hermitize(d.eigenvectors * loglam.asDiagonal() * d.eigenvectors.adjoint());
}

// Number of eigenvalues >= rel_threshold * lambda_max for a PSD matrix.
// The zero matrix has effective rank 0.
inline int effective_rank(const CMat& m, double rel_threshold) {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
    throw DomainError("effective_rank: threshold must lie in (0, 1)");
  detail::check_hermitian_input(m, "effective_rank");
  Eigendecomposition d = detail::eig_sorted_desc(m);
  const double lmax = d.eigenvalues(0);
  const double lmin = d.eigenvalues(d.eigenvalues.size() - 1);
  if (lmin < -1e-10 * std::max(lmax, m.norm()))
    throw DomainError("effective_rank: matrix is not PSD within tolerance");
  if (!(lmax > 0.0)) return 0;
  int count = 0;
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i)
    if (d.eigenvalues(i) >= rel_threshold * lmax) ++count;
  return count;
}

}  // namespace orbitduel
