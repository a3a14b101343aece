#ifndef PEXLAB_LATTICE_HPP
#define PEXLAB_LATTICE_HPP

// 1-D periodic lattice, mode-representation conventions, and the 3-body
// potential tensor. Mode convention: field values phi_i = sqrt(dx)*phi(x_i),
// kernel entries K_ij = dx*K(x_i,x_j). Under it kernel composition is plain
// matrix product, delta(x-y) maps to the identity, trace(K) = integral of the
// diagonal, and mass(phi) = sum |phi_i|^2.

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "pexlab/core.hpp"

namespace pexlab {

struct Grid {
  int M = 0;        // number of sites / modes
  double L = 0.0;   // period length
  double dx = 0.0;  // L / M

  double site(int i) const { return i * dx; }
  bool operator==(const Grid& o) const { return M == o.M && L == o.L; }
};

inline Grid make_grid(int M, double L) {
  require(M >= 2, "make_grid: degenerate grid (M must be >= 2)");
  require(L > 0.0, "make_grid: period length must be positive");
  return Grid{M, L, L / M};
}

inline void require_same_grid(const Grid& a, const Grid& b) {
  require(a == b, "grid mismatch");
}

struct Field {
  Grid grid;
  Vec values;

  Field() = default;
  Field(const Grid& g, Vec v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.M, "Field: value count != M");
  }
  double mass() const { return values.squaredNorm(); }
};

struct Kernel {
  Grid grid;
  Mat entries;

  Kernel() = default;
  Kernel(const Grid& g, Mat e) : grid(g), entries(std::move(e)) {
    require(entries.rows() == grid.M && entries.cols() == grid.M,
            "Kernel: shape != M x M");
  }
};

inline double symmetry_defect(const Mat& a) {
  return max_abs(Mat(a - a.transpose()));
}
inline double hermiticity_defect(const Mat& a) {
  return max_abs(Mat(a - a.adjoint()));
}

// Integer Fourier frequency for lattice index j: 0,1,...,M/2,-(M/2-1),...,-1.
inline int fourier_index(int j, int M) { return (j <= M / 2) ? j : j - M; }

// Unitary DFT mode matrix: column n is e^{i w_n x}/sqrt(M), w_n = 2 pi n / L.
inline Mat fourier_modes(const Grid& g) {
  Mat F(g.M, g.M);
  for (int n = 0; n < g.M; ++n) {
    double w = 2.0 * M_PI * fourier_index(n, g.M) / g.L;
    for (int j = 0; j < g.M; ++j)
      F(j, n) = std::exp(iu * (w * g.site(j))) / std::sqrt(double(g.M));
  }
  return F;
}

inline RVec fourier_multipliers(const Grid& g) {
  RVec w2(g.M);
  for (int n = 0; n < g.M; ++n) {
    double w = 2.0 * M_PI * fourier_index(n, g.M) / g.L;
    w2[n] = w * w;
  }
  return w2;
}

// Spectral Laplacian in mode representation: real symmetric, negative
// semidefinite, exact on band-limited data.
inline RMat laplacian_matrix(const Grid& g) {
  Mat F = fourier_modes(g);
  RVec w2 = fourier_multipliers(g);
  Mat D = F * (-w2.asDiagonal().toDenseMatrix().cast<cplx>()) * F.adjoint();
  return D.real();  // +/- frequency pairing makes it exactly real
}

inline Field laplacian_apply(const Field& f, const RMat& lap) {
  return Field(f.grid, lap.cast<cplx>() * f.values);
}

// Kernel Laplacian acts in the first variable: left multiplication.
inline Kernel laplacian_apply(const Kernel& k, const RMat& lap) {
  return Kernel(k.grid, lap.cast<cplx>() * k.entries);
}

// ---------------------------------------------------------------------------
// 3-body potential tensor v_ijl = v(x_i - x_j, x_j - x_l), periodic wrap,
// invariant under all 6 permutations of the three points.

class PotentialTensor {
 public:
  PotentialTensor(const Grid& g, std::vector<double> vals)
      : grid_(g), v_(std::move(vals)) {
    require((int)v_.size() == g.M * g.M * g.M, "PotentialTensor: size != M^3");
  }

  const Grid& grid() const { return grid_; }
  double operator()(int i, int j, int l) const {
    return v_[(size_t(i) * grid_.M + j) * grid_.M + l];
  }
  double max_abs_value() const {
    double m = 0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  // Largest deviation of v(. . .) from any of the 6 point permutations.
  double symmetry_residual() const {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    const int M = grid_.M;
    double worst = 0.0;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        for (int l = 0; l < M; ++l) {
          int p[3] = {i, j, l};
          double ref = (*this)(i, j, l);
          for (auto& pr : perms) {
            double alt = (*this)(p[pr[0]], p[pr[1]], p[pr[2]]);
            worst = std::max(worst, std::abs(alt - ref));
          }
        }
    return worst;
  }

 private:
  Grid grid_;
  std::vector<double> v_;  // flat (i*M + j)*M + l
};

// Builder specs. The profile route w must be even; the tensor is the fully
// symmetric combination w(x-y)w(y-z) + w(y-z)w(z-x) + w(z-x)w(x-y).
inline PotentialTensor build_potential_constant(const Grid& g, double c) {
  std::vector<double> v(size_t(g.M) * g.M * g.M, c);
  return PotentialTensor(g, std::move(v));
}

inline double wrap_periodic(double r, double L) {
  double x = std::fmod(r, L);
  if (x < -L / 2) x += L;
  if (x >= L / 2) x -= L;
  return x;
}

inline PotentialTensor build_potential_profile(
    const Grid& g, const std::function<double(double)>& w) {
  const int M = g.M;
  // Tabulate on lattice differences; evenness under the periodic wrap is
  // w_table[(M-r)%M] == w_table[r].
  std::vector<double> wt(M);
  for (int r = 0; r < M; ++r) wt[r] = w(wrap_periodic(r * g.dx, g.L));
  for (int r = 0; r < M; ++r)
    require(std::abs(wt[r] - wt[(M - r) % M]) <= 1e-12,
            "build_potential: profile is not even on the periodic lattice");
  auto diff = [&](int a, int b) { return wt[((a - b) % M + M) % M]; };
  std::vector<double> v(size_t(M) * M * M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int l = 0; l < M; ++l) {
        double wij = diff(i, j), wjl = diff(j, l), wli = diff(l, i);
        v[(size_t(i) * M + j) * M + l] = wij * wjl + wjl * wli + wli * wij;
      }
  return PotentialTensor(g, std::move(v));
}

inline PotentialTensor build_potential_table(const Grid& g,
                                             std::vector<double> vals) {
  PotentialTensor v(g, std::move(vals));
  require(v.symmetry_residual() <= 1e-12,
          "build_potential: explicit table violates 3-body symmetry");
  return v;
}

// ---------------------------------------------------------------------------
// Contractions of v against |phi|^2 used by every downstream module.

// vphi2(i,j) = sum_l v_ijl |phi_l|^2
inline RMat contract_v_phi2(const PotentialTensor& v, const Field& phi) {
  require_same_grid(v.grid(), phi.grid);
  const int M = phi.grid.M;
  RVec rho = phi.values.cwiseAbs2();
  RMat out = RMat::Zero(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double s = 0;
      for (int l = 0; l < M; ++l) s += v(i, j, l) * rho[l];
      out(i, j) = s;
    }
  return out;
}

// vphi4(i) = sum_{j,l} v_ijl |phi_j|^2 |phi_l|^2
inline RVec contract_v_phi4(const PotentialTensor& v, const Field& phi) {
  RMat v2 = contract_v_phi2(v, phi);
  RVec rho = phi.values.cwiseAbs2();
  return v2 * rho;
}

// vphi6 = sum_{i,j,l} v_ijl |phi_i|^2 |phi_j|^2 |phi_l|^2
inline double contract_v_phi6(const PotentialTensor& v, const Field& phi) {
  RVec v4 = contract_v_phi4(v, phi);
  RVec rho = phi.values.cwiseAbs2();
  return v4.dot(rho);
}

// psi_i = 1/2 phi_i sum_{j,l} v_ijl |phi_j|^2 |phi_l|^2
inline Field hartree_nonlinearity(const Field& phi, const PotentialTensor& v) {
  require_same_grid(v.grid(), phi.grid);
  RVec v4 = contract_v_phi4(v, phi);
  return Field(phi.grid, 0.5 * v4.cast<cplx>().cwiseProduct(phi.values));
}

}  // namespace pexlab

#endif
