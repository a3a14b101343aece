#ifndef PEXLAB_KRYLOV_HPP
#define PEXLAB_KRYLOV_HPP

// Lanczos propagation of matrix exponentials on the truncated Fock space:
// e^{i theta H} psi for hermitian H, with adaptive substeps, full
// reorthogonalization, and the classical last-component error estimate.

#include <cmath>

#include "pexlab/core.hpp"
#include "pexlab/fock_ops.hpp"

namespace pexlab {

struct KrylovOptions {
  double tol = 1e-12;   // per-apply accuracy target
  int m = 30;           // Krylov dimension per substep
  int max_substeps = 100000;
};

namespace detail {

struct LanczosFactorization {
  Mat V;            // dim x j orthonormal basis
  RVec alpha, beta; // tridiagonal coefficients; beta[j-1] = residual coupling
  int j = 0;        // number of basis vectors
  bool exact = false;  // happy breakdown: Krylov space is invariant
};

// exp(i tau T) e1 for the j x j tridiagonal T of the factorization.
inline Vec small_exp_e1(const LanczosFactorization& f, double tau) {
  const int j = f.j;
  RMat T = RMat::Zero(j, j);
  for (int i = 0; i < j; ++i) {
    T(i, i) = f.alpha[i];
    if (i + 1 < j) T(i, i + 1) = T(i + 1, i) = f.beta[i];
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(T);
  Vec phases(j);
  for (int i = 0; i < j; ++i)
    phases[i] = std::exp(iu * (tau * es.eigenvalues()[i]));
  Vec e1 = Vec::Zero(j);
  e1[0] = 1.0;
  return es.eigenvectors().cast<cplx>() *
         phases.asDiagonal() *
         (es.eigenvectors().cast<cplx>().adjoint() * e1);
}

inline double step_error(const LanczosFactorization& f, const Vec& u) {
  return f.exact ? 0.0 : f.beta[f.j - 1] * std::abs(u[f.j - 1]);
}

// Grow the basis until the full remaining step converges or the cap is hit.
// Checking the a-posteriori estimate every few vectors prunes the build for
// easy steps, where most of the cost would otherwise be reorthogonalization.
inline LanczosFactorization lanczos_adaptive(const FockOperator& H,
                                             const Vec& v0, int m, double tau,
                                             double tol) {
  const std::int64_t dim = H.space->dim();
  LanczosFactorization f;
  f.V.resize(dim, m);
  f.alpha.resize(m);
  f.beta.resize(m);
  f.V.col(0) = v0;
  Vec w(dim);
  for (int j = 0; j < m; ++j) {
    w.setZero();
    H.add_to(f.V.col(j), w);
    double a = f.V.col(j).dot(w).real();
    f.alpha[j] = a;
    w -= a * f.V.col(j);
    if (j > 0) w -= f.beta[j - 1] * f.V.col(j - 1);
    // three-term recurrence with a drift monitor: a full pass runs only when
    // orthogonality against the start vector measurably decays
    double wn = w.norm();
    if (j > 1 && std::abs(f.V.col(0).dot(w)) > 1e-11 * wn)
      for (int i = 0; i <= j; ++i) w -= f.V.col(i).dot(w) * f.V.col(i);
    double b = w.norm();
    f.beta[j] = b;
    f.j = j + 1;
    if (b <= 1e-14 * (1.0 + std::abs(a))) {
      f.exact = true;
      return f;
    }
    if ((j >= 3 && j % 2 == 1) &&
        step_error(f, small_exp_e1(f, tau)) <= 0.25 * tol)
      return f;
    if (j + 1 < m) f.V.col(j + 1) = w / b;
  }
  return f;
}

}  // namespace detail

// e^{i theta H} psi, H hermitian-flagged. Unitary to the options' tolerance.
inline Vec expmv_hermitian(const FockOperator& H, double theta, const Vec& psi,
                           const KrylovOptions& opts = {}) {
  require(H.hermitian, "expmv_hermitian: operator not hermitian-flagged");
  double beta0 = psi.norm();
  if (beta0 == 0.0 || theta == 0.0) return psi;

  Vec cur = psi;
  double remaining = theta;
  const double sign = theta >= 0 ? 1.0 : -1.0;
  int substeps = 0;
  while (sign * remaining > 0.0) {
    double nrm = cur.norm();
    double tol_sub = opts.tol * std::max(1.0, std::abs(remaining / theta));
    auto f = detail::lanczos_adaptive(H, Vec(cur / nrm), opts.m, remaining,
                                      tol_sub);
    double tau = remaining;
    for (;;) {
      Vec u = detail::small_exp_e1(f, tau);
      if (detail::step_error(f, u) <= tol_sub || f.exact) {
        cur = nrm * (f.V.leftCols(f.j) * u);
        remaining -= tau;
        break;
      }
      tau *= 0.5;
      if (std::abs(tau) < 1e-13 * std::abs(theta))
        throw std::runtime_error("Krylov stagnation: tolerance unreachable");
    }
    if (++substeps > opts.max_substeps)
      throw std::runtime_error("Krylov stagnation: substep budget exhausted");
  }
  return cur;
}

// Fock-space propagation psi(t) = e^{+itH} psi, the sign the estimate uses.
inline Vec evolve(const FockOperator& H, const Vec& psi, double t,
                  const KrylovOptions& opts = {}) {
  return expmv_hermitian(H, t, psi, opts);
}

// e^{s G} psi for skew-hermitian G, via the hermitian operator -iG.
inline Vec apply_exp(const FockOperator& G, double s, const Vec& psi,
                     const KrylovOptions& opts = {}) {
  require(G.skew_hermitian, "apply_exp: operator not skew-hermitian-flagged");
  FockOperator Heff;
  Heff.space = G.space;
  Heff.hermitian = true;
  Heff.add_to = [&G](const Vec& x, Vec& y) {
    Vec tmp = Vec::Zero(G.space->dim());
    G.add_to(x, tmp);
    y += -iu * tmp;
  };
  return expmv_hermitian(Heff, s, psi, opts);
}

}  // namespace pexlab

#endif
