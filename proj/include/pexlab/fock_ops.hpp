#ifndef PEXLAB_FOCK_OPS_HPP
#define PEXLAB_FOCK_OPS_HPP

// Fock-space operators. Every operator is held as a matrix-free applier over
// the occupation basis (scatter loops through the space's transition tables),
// so assembly cost is zero and propagation scales like a sparse matvec.
// Sparse matrices are materialized column-by-column only where operator
// algebra is needed (small verification spaces).

#include <array>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "pexlab/core.hpp"
#include "pexlab/fock_space.hpp"
#include "pexlab/lattice.hpp"

namespace pexlab {

struct FockOperator {
  const FockSpace* space = nullptr;
  std::function<void(const Vec&, Vec&)> add_to;  // y += Op x
  bool hermitian = false;
  bool skew_hermitian = false;

  Vec apply(const Vec& x) const {
    Vec y = Vec::Zero(space->dim());
    add_to(x, y);
    return y;
  }
};

inline FockOperator op_sum(const FockSpace& sp,
                           std::vector<std::pair<cplx, FockOperator>> terms) {
  bool herm = true, skew = true;
  for (auto& [c, t] : terms) {
    bool real_c = std::abs(c.imag()) == 0.0;
    herm = herm && t.hermitian && real_c;
    skew = skew && t.skew_hermitian && real_c;
  }
  FockOperator out;
  out.space = &sp;
  out.hermitian = herm;
  out.skew_hermitian = skew;
  out.add_to = [terms = std::move(terms), dim = sp.dim()](const Vec& x, Vec& y) {
    Vec tmp(dim);
    for (auto& [c, t] : terms) {
      if (c == cplx(1.0, 0.0)) {
        t.add_to(x, y);
      } else {
        tmp.setZero();
        t.add_to(x, tmp);
        y += c * tmp;
      }
    }
  };
  return out;
}

// ---------------------------------------------------------------------------
// One-body operator sum_ij h(i,j) a†_i a_j.
inline FockOperator op_one_body(const FockSpace& sp, Mat h) {
  require(h.rows() == sp.modes() && h.cols() == sp.modes(),
          "op_one_body: kernel shape != M x M");
  FockOperator out;
  out.space = &sp;
  out.hermitian = hermiticity_defect(h) <= 1e-14 * (1.0 + max_abs(h));
  out.add_to = [&sp, h = std::move(h)](const Vec& x, Vec& y) {
    const int M = sp.modes();
    const std::int64_t dim = sp.dim();
    for (std::int64_t s = 0; s < dim; ++s) {
      cplx xs = x[s];
      if (xs == cplx(0.0)) continue;
      for (int j = 0; j < M; ++j) {
        int nj = sp.occupation(s, j);
        if (nj == 0) continue;
        std::int32_t s1 = sp.down(j, (std::int32_t)s);
        double aj = sp.sqrt_int(nj);
        for (int i = 0; i < M; ++i) {
          if (i == j) {
            y[s] += h(j, j) * double(nj) * xs;
          } else {
            std::int32_t s2 = sp.up(i, s1);
            y[s2] += h(i, j) * (aj * sp.sqrt_int(sp.occupation(s, i) + 1)) * xs;
          }
        }
      }
    }
  };
  return out;
}

inline FockOperator op_diagonal(const FockSpace& sp, RVec d) {
  require(d.size() == sp.dim(), "op_diagonal: size != dim");
  FockOperator out;
  out.space = &sp;
  out.hermitian = true;
  out.add_to = [d = std::move(d)](const Vec& x, Vec& y) {
    y += d.cast<cplx>().cwiseProduct(x);
  };
  return out;
}

inline FockOperator op_number(const FockSpace& sp) {
  RVec d(sp.dim());
  for (std::int64_t s = 0; s < sp.dim(); ++s) d[s] = sp.total((std::int32_t)s);
  return op_diagonal(sp, std::move(d));
}

// ---------------------------------------------------------------------------
// 3-body interaction V = sum_ijl v_ijl a†_i a†_j a†_l a_i a_j a_l.
// Same triple on both sides, so V is diagonal with normal-ordered falling
// factorials as eigenvalues.
inline RVec v_diagonal(const FockSpace& sp, const PotentialTensor& v) {
  const int M = sp.modes();
  require(v.grid().M == M, "v_diagonal: mode count mismatch");
  RVec d = RVec::Zero(sp.dim());
  for (std::int64_t s = 0; s < sp.dim(); ++s) {
    if (sp.total((std::int32_t)s) < 3) continue;
    int n[FockSpace::kMaxModes];
    for (int i = 0; i < M; ++i) n[i] = sp.occupation((std::int32_t)s, i);
    double val = 0.0;
    for (int i = 0; i < M; ++i) {
      if (n[i] == 0) continue;
      for (int j = 0; j < M; ++j) {
        double fj = n[j] - (j == i ? 1 : 0);
        if (fj <= 0) continue;
        for (int l = 0; l < M; ++l) {
          double fl = n[l] - (l == i ? 1 : 0) - (l == j ? 1 : 0);
          if (fl <= 0) continue;
          val += v(i, j, l) * n[i] * fj * fl;
        }
      }
    }
    d[s] = val;
  }
  return d;
}

// Modewise ladder operators; creations that exceed n_max map to zero.
inline FockOperator op_annihilate(const FockSpace& sp, int mode) {
  require(mode >= 0 && mode < sp.modes(), "op_annihilate: bad mode");
  FockOperator out;
  out.space = &sp;
  out.add_to = [&sp, mode](const Vec& x, Vec& y) {
    for (std::int64_t s = 0; s < sp.dim(); ++s) {
      cplx xs = x[s];
      if (xs == cplx(0.0)) continue;
      int n = sp.occupation((std::int32_t)s, mode);
      if (n > 0) y[sp.down(mode, (std::int32_t)s)] += sp.sqrt_int(n) * xs;
    }
  };
  return out;
}

inline FockOperator op_create(const FockSpace& sp, int mode) {
  require(mode >= 0 && mode < sp.modes(), "op_create: bad mode");
  FockOperator out;
  out.space = &sp;
  out.add_to = [&sp, mode](const Vec& x, Vec& y) {
    for (std::int64_t s = 0; s < sp.dim(); ++s) {
      cplx xs = x[s];
      if (xs == cplx(0.0)) continue;
      std::int32_t t = sp.up(mode, (std::int32_t)s);
      if (t >= 0)
        y[t] += sp.sqrt_int(sp.occupation((std::int32_t)s, mode) + 1) * xs;
    }
  };
  return out;
}

struct HamiltonianParts {
  FockOperator H0;  // sum_ij Lap_ij a†_i a_j  (+Laplacian; kinetic part negative definite)
  FockOperator V;   // diagonal 3-body interaction
  FockOperator HN;  // H0 + V / (6 N^2)
};

inline HamiltonianParts assemble_H(const FockSpace& sp, const Grid& g,
                                   const PotentialTensor& v, double N) {
  require(N > 0, "assemble_H: N must be positive");
  require(g.M == sp.modes(), "assemble_H: grid/space mode mismatch");
  HamiltonianParts h;
  h.H0 = op_one_body(sp, laplacian_matrix(g).cast<cplx>());
  RVec vd = v_diagonal(sp, v);
  h.V = op_diagonal(sp, vd);
  h.HN = op_sum(sp, {{1.0, h.H0}, {1.0, op_diagonal(sp, RVec(vd / (6.0 * N * N)))}});
  h.HN.hermitian = true;
  return h;
}

// ---------------------------------------------------------------------------
// General pair operator sum_ij (K_ij a_i a_j + L_ij a†_i a†_j).
inline FockOperator op_pair(const FockSpace& sp, Mat K, Mat L) {
  require(K.rows() == sp.modes() && L.rows() == sp.modes(),
          "op_pair: kernel shape != M x M");
  FockOperator out;
  out.space = &sp;
  out.add_to = [&sp, K = std::move(K), L = std::move(L)](const Vec& x, Vec& y) {
    const int M = sp.modes();
    const std::int64_t dim = sp.dim();
    const int n_max = sp.n_max();
    for (std::int64_t s = 0; s < dim; ++s) {
      cplx xs = x[s];
      if (xs == cplx(0.0)) continue;
      int tot = sp.total((std::int32_t)s);
      if (tot >= 2) {
        for (int j = 0; j < M; ++j) {
          int nj = sp.occupation((std::int32_t)s, j);
          if (nj == 0) continue;
          std::int32_t s1 = sp.down(j, (std::int32_t)s);
          double aj = sp.sqrt_int(nj);
          for (int i = 0; i < M; ++i) {
            int ni = sp.occupation((std::int32_t)s, i) - (i == j ? 1 : 0);
            if (ni <= 0) continue;
            y[sp.down(i, s1)] += K(i, j) * (aj * sp.sqrt_int(ni)) * xs;
          }
        }
      }
      if (tot <= n_max - 2) {
        for (int j = 0; j < M; ++j) {
          std::int32_t s1 = sp.up(j, (std::int32_t)s);
          double aj = sp.sqrt_int(sp.occupation((std::int32_t)s, j) + 1);
          for (int i = 0; i < M; ++i) {
            int ni = sp.occupation((std::int32_t)s, i) + (i == j ? 1 : 0);
            y[sp.up(i, s1)] += L(i, j) * (aj * sp.sqrt_int(ni + 1)) * xs;
          }
        }
      }
    }
  };
  return out;
}

// ---------------------------------------------------------------------------
// Sparse materialization (column by column) for small-space operator algebra.
inline SpMat materialize(const FockOperator& op) {
  const std::int64_t dim = op.space->dim();
  std::vector<Eigen::Triplet<cplx>> trips;
  Vec e = Vec::Zero(dim), col(dim);
  for (std::int64_t s = 0; s < dim; ++s) {
    e[s] = 1.0;
    col.setZero();
    op.add_to(e, col);
    e[s] = 0.0;
    for (std::int64_t r = 0; r < dim; ++r)
      if (col[r] != cplx(0.0)) trips.emplace_back((int)r, (int)s, col[r]);
  }
  SpMat m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

inline FockOperator from_sparse(const FockSpace& sp, SpMat m, bool herm = false,
                                bool skew = false) {
  FockOperator out;
  out.space = &sp;
  out.hermitian = herm;
  out.skew_hermitian = skew;
  out.add_to = [m = std::move(m)](const Vec& x, Vec& y) { y += m * x; };
  return out;
}

// Randomized adjoint check on sparse probe vectors: <y, Xx> = sign * conj(<x, Xy>).
inline double flag_defect(const FockOperator& op, bool skew, unsigned seed = 7u) {
  const std::int64_t dim = op.space->dim();
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  std::uniform_int_distribution<std::int64_t> pick(0, dim - 1);
  const int nnz = (int)std::min<std::int64_t>(dim, 256);
  double worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    Vec x = Vec::Zero(dim), y = Vec::Zero(dim);
    for (int t = 0; t < nnz; ++t) {
      x[pick(gen)] += cplx(un(gen), un(gen));
      y[pick(gen)] += cplx(un(gen), un(gen));
    }
    x.normalize();
    y.normalize();
    cplx a = y.dot(op.apply(x));
    cplx b = x.dot(op.apply(y));
    double defect = std::abs(a - (skew ? -std::conj(b) : std::conj(b)));
    worst = std::max(worst, defect / (1.0 + std::max(std::abs(a), std::abs(b))));
  }
  return worst;
}

inline void verify_flags(const FockOperator& op, double tol = 1e-12) {
  if (op.hermitian)
    require(flag_defect(op, false) <= tol, "operator failed hermitian check");
  if (op.skew_hermitian)
    require(flag_defect(op, true) <= tol, "operator failed skew-hermitian check");
}

}  // namespace pexlab

#endif
