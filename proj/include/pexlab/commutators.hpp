#ifndef PEXLAB_COMMUTATORS_HPP
#define PEXLAB_COMMUTATORS_HPP

// Closed forms for the six nested commutators [A,V], [A,[A,V]], ...,
// assembled term by term from their normal-ordered integrands, and a sparse
// brute-force bracket oracle that certifies them on small spaces. Comparisons
// run on the truncation-guarded sector (total particles <= n_max - 6) where
// six ladder moves cannot touch the cutoff.
//
// Mode form of the six levels (W2(j,l) = sum_i v_ijl |phi_i|^2,
// W4(l) = sum_ij v_ijl |phi_i|^2 |phi_j|^2, W6 = sum_ijl v |phi|^2^3):
//   level 1: 3 sum v [ cphi_i a†_j a†_l a_i a_j a_l + phi_i a†_i a†_j a†_l a_j a_l ]
//   level 2: 6 sum v [ cphi_i cphi_j a†_l a_i a_j a_l + 2 phi_i cphi_j a†_i a†_l a_j a_l
//                      + phi_i phi_j a†_i a†_j a†_l a_l ] + 6 sum W2 a†_j a†_l a_j a_l
//   level 3: 36 sum W2 [ cphi_j a†_l a_j a_l + phi_j a†_j a†_l a_l ]
//            + 6 sum v [ cphi_i cphi_j cphi_l a_i a_j a_l + phi_i phi_j phi_l a†_i a†_j a†_l ]
//            + 18 sum v [ cphi_i cphi_j phi_l a†_l a_i a_j + phi_i phi_j cphi_l a†_i a†_j a_l ]
//   level 4: 72 sum W2 [ cphi_j cphi_l a_j a_l + phi_j phi_l a†_j a†_l ]
//            + 144 sum W2 cphi_j phi_l a†_l a_j + 72 sum W4 a†_l a_l
//   level 5: 360 sum W4 [ cphi_l a_l + phi_l a†_l ]
//   level 6: 720 W6 * Id

#include <array>
#include <chrono>

#include "pexlab/coherent.hpp"
#include "pexlab/core.hpp"
#include "pexlab/fock_ops.hpp"
#include "pexlab/lattice.hpp"

namespace pexlab {

namespace detail {

struct LadderOps {
  std::array<int, 3> downs{}, ups{};
  int n_down = 0, n_up = 0;
};

inline bool ladder_apply(const FockSpace& sp, std::int32_t s,
                         const LadderOps& ops, double& amp,
                         std::int32_t& target) {
  int n[FockSpace::kMaxModes];
  const int M = sp.modes();
  for (int i = 0; i < M; ++i) n[i] = sp.occupation(s, i);
  amp = 1.0;
  std::int32_t cur = s;
  for (int d = 0; d < ops.n_down; ++d) {
    int mode = ops.downs[d];
    if (n[mode] <= 0) return false;
    amp *= sp.sqrt_int(n[mode]);
    cur = sp.down(mode, cur);
    --n[mode];
  }
  for (int u = 0; u < ops.n_up; ++u) {
    int mode = ops.ups[u];
    std::int32_t nxt = sp.up(mode, cur);
    if (nxt < 0) return false;
    amp *= sp.sqrt_int(n[mode] + 1);
    cur = nxt;
    ++n[mode];
  }
  target = cur;
  return true;
}

}  // namespace detail

struct CommutatorContext {
  Vec phi;
  PotentialTensor v;
  RMat w2;    // sum_i v_ijl |phi_i|^2
  RVec w4;    // sum_ij v_ijl |phi_i|^2 |phi_j|^2
  double w6;  // sum_ijl v |phi_i|^2 |phi_j|^2 |phi_l|^2

  CommutatorContext(const Field& phi_, const PotentialTensor& v_)
      : phi(phi_.values),
        v(v_),
        w2(contract_v_phi2(v_, phi_)),
        w4(contract_v_phi4(v_, phi_)),
        w6(contract_v_phi6(v_, phi_)) {}
};

// Closed form of the level-fold nested commutator [A,...[A,V]...] (level 1..6).
inline FockOperator closed_form(const FockSpace& sp, const Grid& g,
                                const Field& phi, const PotentialTensor& v,
                                int level) {
  require(level >= 1 && level <= 6, "closed_form: level must be in 1..6");
  require(g.M == sp.modes() && phi.grid == g && v.grid() == g,
          "closed_form: grid/space mismatch");
  auto ctx = std::make_shared<CommutatorContext>(phi, v);
  using detail::LadderOps;
  using detail::ladder_apply;

  FockOperator out;
  out.space = &sp;
  // every level is hermitian: A is skew, V hermitian, and [skew, hermitian]
  // is hermitian again
  out.hermitian = true;

  auto scatter = [&sp](Vec& y, std::int32_t s, cplx coeff, const LadderOps& ops,
                       cplx xs) {
    double amp;
    std::int32_t t;
    if (ladder_apply(sp, s, ops, amp, t)) y[t] += coeff * amp * xs;
  };

  switch (level) {
    case 1:
      out.add_to = [&sp, ctx, scatter](const Vec& x, Vec& y) {
        const int M = sp.modes();
        for (std::int64_t s = 0; s < sp.dim(); ++s) {
          cplx xs = x[s];
          if (xs == cplx(0.0)) continue;
          for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
              for (int l = 0; l < M; ++l) {
                double vv = 3.0 * ctx->v(i, j, l);
                if (vv == 0.0) continue;
                scatter(y, (std::int32_t)s, vv * std::conj(ctx->phi[i]),
                        LadderOps{{i, j, l}, {j, l}, 3, 2}, xs);
                scatter(y, (std::int32_t)s, vv * ctx->phi[i],
                        LadderOps{{j, l}, {i, j, l}, 2, 3}, xs);
              }
        }
      };
      break;
    case 2:
      out.add_to = [&sp, ctx, scatter](const Vec& x, Vec& y) {
        const int M = sp.modes();
        for (std::int64_t s = 0; s < sp.dim(); ++s) {
          cplx xs = x[s];
          if (xs == cplx(0.0)) continue;
          for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
              for (int l = 0; l < M; ++l) {
                double vv = 6.0 * ctx->v(i, j, l);
                if (vv == 0.0) continue;
                cplx pi = ctx->phi[i], pj = ctx->phi[j];
                scatter(y, (std::int32_t)s, vv * std::conj(pi) * std::conj(pj),
                        LadderOps{{i, j, l}, {l}, 3, 1}, xs);
                scatter(y, (std::int32_t)s, 2.0 * vv * pi * std::conj(pj),
                        LadderOps{{j, l}, {i, l}, 2, 2}, xs);
                scatter(y, (std::int32_t)s, vv * pi * pj,
                        LadderOps{{l}, {i, j, l}, 1, 3}, xs);
              }
          for (int j = 0; j < M; ++j)
            for (int l = 0; l < M; ++l)
              scatter(y, (std::int32_t)s, 6.0 * ctx->w2(j, l),
                      LadderOps{{j, l}, {j, l}, 2, 2}, xs);
        }
      };
      break;
    case 3:
      out.add_to = [&sp, ctx, scatter](const Vec& x, Vec& y) {
        const int M = sp.modes();
        for (std::int64_t s = 0; s < sp.dim(); ++s) {
          cplx xs = x[s];
          if (xs == cplx(0.0)) continue;
          for (int j = 0; j < M; ++j)
            for (int l = 0; l < M; ++l) {
              double w = 36.0 * ctx->w2(j, l);
              scatter(y, (std::int32_t)s, w * std::conj(ctx->phi[j]),
                      LadderOps{{j, l}, {l}, 2, 1}, xs);
              scatter(y, (std::int32_t)s, w * ctx->phi[j],
                      LadderOps{{l}, {j, l}, 1, 2}, xs);
            }
          for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
              for (int l = 0; l < M; ++l) {
                double vv = ctx->v(i, j, l);
                if (vv == 0.0) continue;
                cplx pi = ctx->phi[i], pj = ctx->phi[j], pl = ctx->phi[l];
                scatter(y, (std::int32_t)s,
                        6.0 * vv * std::conj(pi * pj * pl),
                        LadderOps{{i, j, l}, {}, 3, 0}, xs);
                scatter(y, (std::int32_t)s, 6.0 * vv * pi * pj * pl,
                        LadderOps{{}, {i, j, l}, 0, 3}, xs);
                scatter(y, (std::int32_t)s,
                        18.0 * vv * std::conj(pi) * std::conj(pj) * pl,
                        LadderOps{{i, j}, {l}, 2, 1}, xs);
                scatter(y, (std::int32_t)s,
                        18.0 * vv * pi * pj * std::conj(pl),
                        LadderOps{{l}, {i, j}, 1, 2}, xs);
              }
        }
      };
      break;
    case 4:
      out.add_to = [&sp, ctx, scatter](const Vec& x, Vec& y) {
        const int M = sp.modes();
        for (std::int64_t s = 0; s < sp.dim(); ++s) {
          cplx xs = x[s];
          if (xs == cplx(0.0)) continue;
          for (int j = 0; j < M; ++j)
            for (int l = 0; l < M; ++l) {
              double w = ctx->w2(j, l);
              if (w == 0.0) continue;
              cplx pj = ctx->phi[j], pl = ctx->phi[l];
              scatter(y, (std::int32_t)s, 72.0 * w * std::conj(pj * pl),
                      LadderOps{{j, l}, {}, 2, 0}, xs);
              scatter(y, (std::int32_t)s, 72.0 * w * pj * pl,
                      LadderOps{{}, {j, l}, 0, 2}, xs);
              scatter(y, (std::int32_t)s, 144.0 * w * std::conj(pj) * pl,
                      LadderOps{{j}, {l}, 1, 1}, xs);
            }
          for (int l = 0; l < M; ++l)
            scatter(y, (std::int32_t)s, 72.0 * ctx->w4[l],
                    LadderOps{{l}, {l}, 1, 1}, xs);
        }
      };
      break;
    case 5:
      out.add_to = [&sp, ctx, scatter](const Vec& x, Vec& y) {
        const int M = sp.modes();
        for (std::int64_t s = 0; s < sp.dim(); ++s) {
          cplx xs = x[s];
          if (xs == cplx(0.0)) continue;
          for (int l = 0; l < M; ++l) {
            double w = 360.0 * ctx->w4[l];
            scatter(y, (std::int32_t)s, w * std::conj(ctx->phi[l]),
                    LadderOps{{l}, {}, 1, 0}, xs);
            scatter(y, (std::int32_t)s, w * ctx->phi[l],
                    LadderOps{{}, {l}, 0, 1}, xs);
          }
        }
      };
      break;
    case 6:
      out.add_to = [scale = 720.0 * ctx->w6](const Vec& x, Vec& y) {
        y += scale * x;
      };
      break;
  }
  return out;
}

// Scalar of the level-6 closed form (a real multiple of the identity).
inline double level6_scalar(const Field& phi, const PotentialTensor& v) {
  return 720.0 * contract_v_phi6(v, phi);
}

// [X, Y] = XY - YX as sparse matrices (dimension budget applies upstream).
inline SpMat oracle_bracket(const SpMat& x, const SpMat& y) {
  return SpMat(x * y - y * x);
}

// ---------------------------------------------------------------------------

struct LemmaReport {
  int M = 0, n_max = 0;
  std::int64_t dim = 0, sector_dim = 0;
  std::array<double, 6> abs_deviation{};
  std::array<double, 6> rel_deviation{};
  std::array<double, 6> oracle_scale{};
  double level6_identity_defect = 0.0;  // off-identity content of the oracle
  double level6_imag = 0.0;
  double level6_scalar_closed = 0.0;
  double level6_scalar_oracle = 0.0;
  double runtime_sec = 0.0;

  double max_rel_deviation() const {
    double m = 0;
    for (double d : rel_deviation) m = std::max(m, d);
    return m;
  }
};

namespace detail {

// max |entry| over the guarded columns
inline double guarded_col_maxabs(const SpMat& m, std::int64_t cols) {
  double worst = 0.0;
  for (std::int64_t c = 0; c < cols; ++c)
    for (SpMat::InnerIterator it(m, c); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace detail

// Certify all six closed forms against iterated brute-force brackets with A.
inline LemmaReport verify_lemma(const FockSpace& sp, const Grid& g,
                                const Field& phi, const PotentialTensor& v) {
  require(sp.n_max() >= 6, "verify_lemma: sector empty (need n_max >= 6)");
  auto t0 = std::chrono::steady_clock::now();

  LemmaReport rep;
  rep.M = sp.modes();
  rep.n_max = sp.n_max();
  rep.dim = sp.dim();
  rep.sector_dim = sp.grade_range(sp.n_max() - 6).second;

  SpMat A = materialize(op_A(sp, phi));
  SpMat bracket = materialize(op_diagonal(sp, v_diagonal(sp, v)));  // starts at V
  const std::int64_t gc = rep.sector_dim;  // guarded column count

  for (int level = 1; level <= 6; ++level) {
    bracket = oracle_bracket(A, bracket);
    SpMat closed = materialize(closed_form(sp, g, phi, v, level));
    SpMat diff = closed - bracket;
    rep.abs_deviation[level - 1] = detail::guarded_col_maxabs(diff, gc);
    rep.oracle_scale[level - 1] = detail::guarded_col_maxabs(bracket, gc);
    rep.rel_deviation[level - 1] =
        rep.abs_deviation[level - 1] / std::max(rep.oracle_scale[level - 1], 1e-12);
  }

  // level-6 structure: oracle restricted to the guarded sector is c * Id
  Mat dense6 = Mat(bracket).topLeftCorner(gc, gc);
  cplx c6 = gc > 0 ? dense6.trace() / double(gc) : cplx(0.0);
  rep.level6_scalar_oracle = c6.real();
  rep.level6_imag = std::abs(c6.imag());
  rep.level6_identity_defect =
      gc > 0 ? max_abs(Mat(dense6 - c6 * Mat::Identity(gc, gc))) : 0.0;
  rep.level6_scalar_closed = level6_scalar(phi, v);

  rep.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Residual of the operator identity equivalent to the Hartree equation:
//   (1/i) Adot + [A, H0] + (1/6)(1/5!) [A,[A,[A,[A,[A,V]]]]] = 0.

struct ConsistencyReport {
  double restricted_norm = 0.0;    // max ||R e_s|| over guarded columns
  double vacuum_column_norm = 0.0; // ||R Omega|| = l2 norm of the residual field
};

inline ConsistencyReport hartree_consistency_residual(
    const FockSpace& sp, const Grid& g, const Field& phi, const Field& phi_t,
    const PotentialTensor& v) {
  SpMat A = materialize(op_A(sp, phi));
  SpMat H0 = materialize(op_one_body(sp, laplacian_matrix(g).cast<cplx>()));
  SpMat Adot = materialize(op_A(sp, phi_t));
  SpMat L5 = materialize(closed_form(sp, g, phi, v, 5));
  SpMat R = SpMat((1.0 / iu) * Adot) + oracle_bracket(A, H0) +
            SpMat((1.0 / 720.0) * L5);

  ConsistencyReport rep;
  std::int64_t guarded =
      sp.n_max() >= 1 ? sp.grade_range(sp.n_max() - 1).second : 0;
  Vec e = Vec::Zero(sp.dim());
  for (std::int64_t s = 0; s < guarded; ++s) {
    e[s] = 1.0;
    double nrm = Vec(R * e).norm();
    if (s == 0) rep.vacuum_column_norm = nrm;
    rep.restricted_norm = std::max(rep.restricted_norm, nrm);
    e[s] = 0.0;
  }
  return rep;
}

}  // namespace pexlab

#endif
