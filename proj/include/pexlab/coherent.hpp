#ifndef PEXLAB_COHERENT_HPP
#define PEXLAB_COHERENT_HPP

// Generators of the mean-field and pair-excitation unitaries: the shift
// generator A(phi), the quadratic generator B(k), and the sp -> Quad map
// Q(d,k,l). Exponentials go through the Krylov machinery (apply_exp); whole
// truncated generators are exponentiated, never factored forms.

#include "pexlab/core.hpp"
#include "pexlab/fock_ops.hpp"
#include "pexlab/krylov.hpp"
#include "pexlab/lattice.hpp"

namespace pexlab {

// A(phi) = a(conj(phi)) - a†(phi) = sum_i conj(phi_i) a_i - phi_i a†_i.
inline FockOperator op_A(const FockSpace& sp, const Field& phi) {
  require(phi.grid.M == sp.modes(), "op_A: mode count mismatch");
  FockOperator out;
  out.space = &sp;
  out.skew_hermitian = true;
  out.add_to = [&sp, phi = phi.values](const Vec& x, Vec& y) {
    const int M = sp.modes();
    const std::int64_t dim = sp.dim();
    const int n_max = sp.n_max();
    for (std::int64_t s = 0; s < dim; ++s) {
      cplx xs = x[s];
      if (xs == cplx(0.0)) continue;
      bool can_up = sp.total((std::int32_t)s) < n_max;
      for (int i = 0; i < M; ++i) {
        int ni = sp.occupation((std::int32_t)s, i);
        if (ni > 0)
          y[sp.down(i, (std::int32_t)s)] += std::conj(phi[i]) * sp.sqrt_int(ni) * xs;
        if (can_up)
          y[sp.up(i, (std::int32_t)s)] -= phi[i] * sp.sqrt_int(ni + 1) * xs;
      }
    }
  };
  return out;
}

// B(k) = 1/2 sum_ij (k_ij a_i a_j - conj(k_ij) a†_i a†_j), k symmetric.
// Asymmetric kernels are rejected, not symmetrized.
inline FockOperator op_B(const FockSpace& sp, const Kernel& k) {
  require(k.grid.M == sp.modes(), "op_B: mode count mismatch");
  require(symmetry_defect(k.entries) <= 1e-12 * (1.0 + max_abs(k.entries)),
          "op_B: kernel must be symmetric");
  FockOperator out = op_pair(sp, 0.5 * k.entries, -0.5 * k.entries.conjugate());
  out.skew_hermitian = true;
  return out;
}

// ---------------------------------------------------------------------------
// Symplectic blocks S(d,k,l) = ((d, k), (l, -d^T)), k and l symmetric.
struct SymplecticBlocks {
  Mat d, k, l;

  SymplecticBlocks() = default;
  SymplecticBlocks(Mat d_, Mat k_, Mat l_)
      : d(std::move(d_)), k(std::move(k_)), l(std::move(l_)) {
    double scale = 1.0 + std::max(max_abs(k), max_abs(l));
    require(symmetry_defect(k) <= 1e-12 * scale,
            "SymplecticBlocks: k not symmetric");
    require(symmetry_defect(l) <= 1e-12 * scale,
            "SymplecticBlocks: l not symmetric");
  }

  Mat as_matrix() const {
    const auto M = d.rows();
    Mat s(2 * M, 2 * M);
    s.topLeftCorner(M, M) = d;
    s.topRightCorner(M, M) = k;
    s.bottomLeftCorner(M, M) = l;
    s.bottomRightCorner(M, M) = -d.transpose();
    return s;
  }

  static SymplecticBlocks from_matrix(const Mat& s) {
    const auto M = s.rows() / 2;
    Mat d = s.topLeftCorner(M, M);
    require(max_abs(Mat(s.bottomRightCorner(M, M) + d.transpose())) <=
                1e-10 * (1.0 + max_abs(d)),
            "SymplecticBlocks: matrix not in sp form");
    return SymplecticBlocks(d, s.topRightCorner(M, M), s.bottomLeftCorner(M, M));
  }

  static SymplecticBlocks bracket(const SymplecticBlocks& a,
                                  const SymplecticBlocks& b) {
    Mat am = a.as_matrix(), bm = b.as_matrix();
    return from_matrix(am * bm - bm * am);
  }
};

// Q(d,k,l) = -int d (a_x a†_y + a†_y a_x)/2 + (1/2) int k a_x a_y
//            - (1/2) int l a†_x a†_y, assembled with exactly those terms.
inline FockOperator quad_from_blocks(const FockSpace& sp,
                                     const SymplecticBlocks& S) {
  require(S.d.rows() == sp.modes(), "quad_from_blocks: mode count mismatch");
  FockOperator pair = op_pair(sp, 0.5 * S.k, -0.5 * S.l);
  FockOperator normal = op_one_body(sp, Mat(-0.5 * S.d.transpose()));
  normal.hermitian = false;
  FockOperator anti;  // sum_ij (-d_ij/2) a_i a†_j; truncation kills the top grade
  anti.space = &sp;
  anti.add_to = [&sp, d = S.d](const Vec& x, Vec& y) {
    const int M = sp.modes();
    const std::int64_t dim = sp.dim();
    const int n_max = sp.n_max();
    for (std::int64_t s = 0; s < dim; ++s) {
      cplx xs = x[s];
      if (xs == cplx(0.0) || sp.total((std::int32_t)s) >= n_max) continue;
      for (int j = 0; j < M; ++j) {
        std::int32_t s1 = sp.up(j, (std::int32_t)s);
        double aj = sp.sqrt_int(sp.occupation((std::int32_t)s, j) + 1);
        for (int i = 0; i < M; ++i) {
          int ni = sp.occupation(s1, i);
          if (ni == 0) continue;
          y[sp.down(i, s1)] += (-0.5 * d(i, j)) * (aj * sp.sqrt_int(ni)) * xs;
        }
      }
    }
  };
  return op_sum(sp, {{1.0, pair}, {1.0, normal}, {1.0, anti}});
}

// Coherent state e^{-sqrt(N) A(phi)} Omega with mean particle number N*mass.
inline Vec coherent_state(const FockSpace& sp, const Field& phi, double N,
                          const KrylovOptions& opts = {}) {
  return apply_exp(op_A(sp, phi), -std::sqrt(N), sp.vacuum(), opts);
}

inline double poisson_pmf(double lambda, int n) {
  double logp = -lambda + n * std::log(lambda) - std::lgamma(n + 1.0);
  return std::exp(logp);
}

// Total variation between the particle-number distribution of psi and
// Poisson(lambda), counting the Poisson mass beyond the cutoff.
inline double poisson_total_variation(const FockSpace& sp, const Vec& psi,
                                      double lambda) {
  RVec p = sp.number_distribution(psi);
  double tv = 0.0, poisson_seen = 0.0;
  for (int n = 0; n <= sp.n_max(); ++n) {
    double q = poisson_pmf(lambda, n);
    poisson_seen += q;
    tv += std::abs(p[n] - q);
  }
  tv += 1.0 - poisson_seen;  // Poisson tail beyond the cutoff
  return 0.5 * tv;
}

}  // namespace pexlab

#endif
