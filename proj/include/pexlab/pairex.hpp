#ifndef PEXLAB_PAIREX_HPP
#define PEXLAB_PAIREX_HPP

// Pair-excitation kernel dynamics. The unknown is the symmetric kernel k
// itself; u = sinh(k) and c = cosh(k) always come from the block exponential
// exp(((0,k),(conj k,0))) so the hyperbolic constraint c c - u conj(u) = Id
// holds by construction. Each RK4 stage solves the affine system
// coeff_residual(k, kdot) = 0 for kdot; the map is only real-linear (the
// block direction embeds conj(kdot)), so the solve runs over the real and
// imaginary parts of the symmetric entries.

#include <unsupported/Eigen/MatrixFunctions>

#include <vector>

#include "pexlab/core.hpp"
#include "pexlab/hartree.hpp"
#include "pexlab/lattice.hpp"

namespace pexlab {

// g(t,x,y) = -Lap delta - (int v |phi_3|^2) conj(phi_1) phi_2
//            - 1/2 (int v |phi_2|^2 |phi_3|^2) delta ; hermitian.
inline Mat kernel_g(const Field& phi, const PotentialTensor& v,
                    const RMat& lap) {
  require_same_grid(phi.grid, v.grid());
  const int M = phi.grid.M;
  RMat v2 = contract_v_phi2(v, phi);
  RVec v4 = contract_v_phi4(v, phi);
  Mat g = -lap.cast<cplx>();
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j)
      g(i, j) -= v2(i, j) * std::conj(phi.values[i]) * phi.values[j];
    g(i, i) -= 0.5 * v4[i];
  }
  return g;
}

// m(t,x,y) = (int v |phi_3|^2) conj(phi_1) conj(phi_2) ; symmetric.
inline Mat kernel_m(const Field& phi, const PotentialTensor& v) {
  require_same_grid(phi.grid, v.grid());
  const int M = phi.grid.M;
  RMat v2 = contract_v_phi2(v, phi);
  Mat m(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      m(i, j) = v2(i, j) * std::conj(phi.values[i]) * std::conj(phi.values[j]);
  return m;
}

inline Mat hyperbolic_block(const Mat& k) {
  const auto M = k.rows();
  Mat K = Mat::Zero(2 * M, 2 * M);
  K.topRightCorner(M, M) = k;
  K.bottomLeftCorner(M, M) = k.conjugate();
  return K;
}

// (u, c) = (sinh(k), cosh(k)) via the block exponential.
inline std::pair<Mat, Mat> sinh_cosh(const Mat& k) {
  const auto M = k.rows();
  Mat E = hyperbolic_block(k).exp();
  return {E.topRightCorner(M, M), E.topLeftCorner(M, M)};
}

// Directional derivatives (u_t, c_t) along kdot, by the doubled block-matrix
// exponential exp(((K, Kdot), (0, K))) whose top-right block is Dexp(K)[Kdot].
inline std::pair<Mat, Mat> sinh_cosh_frechet(const Mat& k, const Mat& kdot) {
  const auto M = k.rows();
  Mat K = hyperbolic_block(k), Kd = hyperbolic_block(kdot);
  Mat X = Mat::Zero(4 * M, 4 * M);
  X.topLeftCorner(2 * M, 2 * M) = K;
  X.bottomRightCorner(2 * M, 2 * M) = K;
  X.topRightCorner(2 * M, 2 * M) = Kd;
  Mat D = X.exp().topRightCorner(2 * M, 2 * M);
  return {D.topRightCorner(M, M), D.topLeftCorner(M, M)};
}

// Left side of the pair-creation coefficient equation:
// (i u_t + u g^T + g u) conj(c) - (i c_t - [c,g]) u - u conj(m) u - c m conj(c).
inline Mat coeff_residual_parts(const Mat& u, const Mat& c, const Mat& u_t,
                                const Mat& c_t, const Mat& g, const Mat& m) {
  return (iu * u_t + u * g.transpose() + g * u) * c.conjugate() -
         (iu * c_t - (c * g - g * c)) * u - u * m.conjugate() * u -
         c * m * c.conjugate();
}

// d(t,x,y) = (i u_t + u g^T + g u) conj(u) - (i c_t + [g,c]) c
//            - u conj(m) c - c m conj(u).
inline Mat kernel_d_parts(const Mat& u, const Mat& c, const Mat& u_t,
                          const Mat& c_t, const Mat& g, const Mat& m) {
  return (iu * u_t + u * g.transpose() + g * u) * u.conjugate() -
         (iu * c_t + (g * c - c * g)) * c - u * m.conjugate() * c -
         c * m * u.conjugate();
}

// Quotient form of the k-equation:
// (i u_t + u g^T + g u - (I+p) m) - (i p_t + [g,p] + u conj(m)) (I+p)^{-1} u.
inline Mat quotient_residual_parts(const Mat& u, const Mat& c, const Mat& u_t,
                                   const Mat& c_t, const Mat& g, const Mat& m) {
  Mat lhs = iu * u_t + u * g.transpose() + g * u - c * m;
  // I + p = cosh(k) is hermitian positive definite; dense solve for (I+p)^{-1}u
  Mat x = Eigen::PartialPivLU<Mat>(c).solve(u);
  Mat rhs = (iu * c_t + (g * c - c * g) + u * m.conjugate()) * x;
  return lhs - rhs;
}

inline double chi0(const Field& phi, const PotentialTensor& v) {
  return contract_v_phi6(v, phi) / 3.0;
}

// chi1 = -1/2 Re trace(d); the imaginary part is a diagnostic, not asserted.
inline double chi1(const Mat& d) { return -0.5 * d.trace().real(); }
inline double chi1_imag(const Mat& d) { return -0.5 * d.trace().imag(); }

// ---------------------------------------------------------------------------

struct PairState {
  double t = 0.0;
  Mat k, u, c, kdot;

  double hyperbolic_residual() const {
    return max_abs(Mat(c * c - u * u.conjugate() -
                       Mat::Identity(k.rows(), k.cols())));
  }
  double symmetry_residual() const { return symmetry_defect(k); }
};

inline Mat coeff_residual(const PairState& ps, const Mat& kdot, const Mat& g,
                          const Mat& m) {
  auto [u_t, c_t] = sinh_cosh_frechet(ps.k, kdot);
  return coeff_residual_parts(ps.u, ps.c, u_t, c_t, g, m);
}

inline Mat kernel_d(const PairState& ps, const Mat& g, const Mat& m) {
  auto [u_t, c_t] = sinh_cosh_frechet(ps.k, ps.kdot);
  return kernel_d_parts(ps.u, ps.c, u_t, c_t, g, m);
}

namespace detail {

inline Mat sym_part(const Mat& a) { return 0.5 * (a + a.transpose()); }

inline RVec vec_sym(const Mat& a) {
  const int M = (int)a.rows();
  const int nS = M * (M + 1) / 2;
  RVec out(2 * nS);
  int q = 0;
  for (int i = 0; i < M; ++i)
    for (int j = i; j < M; ++j, ++q) {
      out[q] = a(i, j).real();
      out[nS + q] = a(i, j).imag();
    }
  return out;
}

inline Mat unvec_sym(const RVec& x, int M) {
  const int nS = M * (M + 1) / 2;
  Mat out(M, M);
  int q = 0;
  for (int i = 0; i < M; ++i)
    for (int j = i; j < M; ++j, ++q) {
      cplx val(x[q], x[nS + q]);
      out(i, j) = val;
      out(j, i) = val;
    }
  return out;
}

}  // namespace detail

struct StageSolution {
  Mat kdot, u, c, u_t, c_t;
  double residual = 0.0;  // verified |coeff_residual| after the solve
};

// Solve the affine system coeff_residual(k, kdot) = 0 for symmetric kdot.
inline StageSolution solve_kdot(const Mat& k, const Mat& g, const Mat& m,
                                double verify_tol = 1e-8) {
  const int M = (int)k.rows();
  const int nS = M * (M + 1) / 2;
  const int n = 2 * nS;

  auto [u, c] = sinh_cosh(k);
  Mat b = coeff_residual_parts(u, c, Mat::Zero(M, M), Mat::Zero(M, M), g, m);

  RMat sys(n, n);
  for (int q = 0; q < nS; ++q) {
    int i = 0, j = 0, r = q;
    for (i = 0; i < M; ++i) {
      if (r < M - i) {
        j = i + r;
        break;
      }
      r -= M - i;
    }
    Mat dir = Mat::Zero(M, M);
    dir(i, j) = dir(j, i) = 1.0;
    for (int part = 0; part < 2; ++part) {
      Mat direction = part == 0 ? dir : Mat(iu * dir);
      auto [u_t, c_t] = sinh_cosh_frechet(k, direction);
      Mat lin = (iu * u_t) * c.conjugate() - (iu * c_t) * u;
      sys.col(part == 0 ? q : nS + q) = detail::vec_sym(detail::sym_part(lin));
    }
  }

  RVec rhs = -detail::vec_sym(detail::sym_part(b));
  Eigen::PartialPivLU<RMat> lu(sys);
  RVec xi = lu.solve(rhs);

  StageSolution st;
  st.kdot = detail::unvec_sym(xi, M);
  st.u = u;
  st.c = c;
  auto [u_t, c_t] = sinh_cosh_frechet(k, st.kdot);
  st.u_t = u_t;
  st.c_t = c_t;
  st.residual = max_abs(coeff_residual_parts(u, c, u_t, c_t, g, m));
  if (st.residual > verify_tol * (1.0 + max_abs(b)))
    throw std::runtime_error(
        "solve_kdot: linear solve singular (residual " +
        std::to_string(st.residual) + "); cosh conditioning or dt too large");
  return st;
}

// ---------------------------------------------------------------------------

struct PairStep {
  PairState state;
  double hyp_residual = 0.0;
  double coeff_residual_norm = 0.0;
  double quotient_residual_norm = 0.0;
  double symmetry_residual = 0.0;
  double chi0_val = 0.0;
  double chi1_val = 0.0;
  double chi1_imag_val = 0.0;
  double theta0 = 0.0;  // cumulative int chi0 ds
  double theta1 = 0.0;  // cumulative int chi1 ds
};

struct PairTrajectory {
  double dt = 0.0;
  std::vector<PairStep> steps;

  const PairStep& at(int n) const { return steps.at(n); }
};

// Integrate the k-equation over the Hartree trajectory. `hartree_half` must be
// solved with step dt/2 so that RK4 stage times land on stored states.
inline PairTrajectory solve_pairex(const HartreeTrajectory& hartree_half,
                                   const PotentialTensor& v, double T,
                                   double dt, Mat k0 = Mat()) {
  const Grid grid = hartree_half.states.at(0).grid;
  const int M = grid.M;
  require(std::abs(hartree_half.dt - dt / 2) <= 1e-12 * dt,
          "solve_pairex: hartree trajectory must be solved at dt/2");
  int n_steps = int(std::llround(T / dt));
  require((int)hartree_half.states.size() >= 2 * n_steps + 1,
          "solve_pairex: hartree trajectory too short");
  RMat lap = laplacian_matrix(grid);

  if (k0.size() == 0) k0 = Mat::Zero(M, M);
  require(symmetry_defect(k0) <= 1e-12 * (1.0 + max_abs(k0)),
          "solve_pairex: k0 must be symmetric");

  auto g_at = [&](int half_idx) {
    return kernel_g(hartree_half.states[half_idx], v, lap);
  };
  auto m_at = [&](int half_idx) {
    return kernel_m(hartree_half.states[half_idx], v);
  };
  auto chi0_at = [&](int half_idx) {
    return chi0(hartree_half.states[half_idx], v);
  };

  PairTrajectory tr;
  tr.dt = dt;
  tr.steps.reserve(n_steps + 1);

  Mat k = k0;
  double theta0 = 0.0, theta1 = 0.0;

  auto record = [&](int n, const StageSolution& st) {
    PairStep ps;
    ps.state.t = n * dt;
    ps.state.k = k;
    ps.state.u = st.u;
    ps.state.c = st.c;
    ps.state.kdot = st.kdot;
    ps.hyp_residual = ps.state.hyperbolic_residual();
    ps.coeff_residual_norm = st.residual;
    Mat g = g_at(2 * n), m = m_at(2 * n);
    ps.quotient_residual_norm =
        max_abs(quotient_residual_parts(st.u, st.c, st.u_t, st.c_t, g, m));
    ps.symmetry_residual = ps.state.symmetry_residual();
    ps.chi0_val = chi0_at(2 * n);
    Mat d = kernel_d_parts(st.u, st.c, st.u_t, st.c_t, g, m);
    ps.chi1_val = chi1(d);
    ps.chi1_imag_val = chi1_imag(d);
    ps.theta0 = theta0;
    ps.theta1 = theta1;
    tr.steps.push_back(std::move(ps));
  };

  for (int n = 0; n < n_steps; ++n) {
    Mat g0 = g_at(2 * n), m0 = m_at(2 * n);
    Mat gh = g_at(2 * n + 1), mh = m_at(2 * n + 1);
    Mat g1 = g_at(2 * n + 2), m1 = m_at(2 * n + 2);

    StageSolution s1 = solve_kdot(k, g0, m0);
    record(n, s1);

    StageSolution s2 = solve_kdot(Mat(k + 0.5 * dt * s1.kdot), gh, mh);
    StageSolution s3 = solve_kdot(Mat(k + 0.5 * dt * s2.kdot), gh, mh);
    StageSolution s4 = solve_kdot(Mat(k + dt * s3.kdot), g1, m1);

    // phase quadrature rides the same RK4 stages
    auto stage_chi1 = [&](const StageSolution& st, const Mat& g, const Mat& m) {
      return chi1(kernel_d_parts(st.u, st.c, st.u_t, st.c_t, g, m));
    };
    double x1 = chi0_at(2 * n), xh = chi0_at(2 * n + 1), x4 = chi0_at(2 * n + 2);
    theta0 += dt / 6.0 * (x1 + 4.0 * xh + x4);
    double c1 = stage_chi1(s1, g0, m0);
    double c2 = stage_chi1(s2, gh, mh);
    double c3 = stage_chi1(s3, gh, mh);
    double c4 = stage_chi1(s4, g1, m1);
    theta1 += dt / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);

    k = k + dt / 6.0 * (s1.kdot + 2.0 * s2.kdot + 2.0 * s3.kdot + s4.kdot);
    k = detail::sym_part(k);
  }
  StageSolution sT = solve_kdot(k, g_at(2 * n_steps), m_at(2 * n_steps));
  record(n_steps, sT);
  return tr;
}

}  // namespace pexlab

#endif
