#include <catch2/catch.hpp>

#include <random>

#include "pexlab/lattice.hpp"

using namespace pexlab;

namespace {

Field random_field(const Grid& g, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  Vec v(g.M);
  for (int i = 0; i < g.M; ++i) v[i] = scale * cplx(un(gen), un(gen));
  return Field(g, v);
}

// Smooth low-harmonic field with values recorded in mode convention.
Field smooth_field(const Grid& g, std::initializer_list<cplx> amps) {
  Vec v = Vec::Zero(g.M);
  int n = 0;
  for (cplx a : amps) {
    for (int j = 0; j < g.M; ++j)
      v[j] += a * std::exp(iu * (2.0 * M_PI * n * g.site(j) / g.L));
    ++n;
  }
  v *= std::sqrt(g.dx);
  return Field(g, v);
}

}  // namespace

TEST_CASE("make_grid basics", "[lattice]") {
  Grid g = make_grid(4, 2 * M_PI);
  CHECK(g.dx == Approx(M_PI / 2).epsilon(1e-15));
  CHECK(g.site(3) == Approx(3 * M_PI / 2));
  CHECK(g.dx * g.M == Approx(g.L).margin(1e-15));

  Grid g2 = make_grid(2, 1.0);
  CHECK(g2.dx == Approx(0.5));

  CHECK_THROWS(make_grid(1, 1.0));
  CHECK_THROWS(make_grid(4, 0.0));
  CHECK_THROWS(make_grid(4, -1.0));
}

TEST_CASE("constant potential", "[lattice]") {
  Grid g = make_grid(4, 2 * M_PI);
  PotentialTensor v = build_potential_constant(g, 1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int l = 0; l < 4; ++l) CHECK(v(i, j, l) == 1.0);
  CHECK(v.symmetry_residual() == 0.0);
}

TEST_CASE("profile potential is fully symmetric", "[lattice]") {
  Grid g = make_grid(4, 2 * M_PI);
  PotentialTensor v = build_potential_profile(
      g, [&](double r) { return std::cos(2 * M_PI * r / g.L); });
  CHECK(v.symmetry_residual() < 1e-12);

  Grid g2 = make_grid(6, 5.0);
  PotentialTensor v2 = build_potential_profile(g2, [](double r) {
    return 0.3 * std::exp(-r * r / 0.8);
  });
  CHECK(v2.symmetry_residual() < 1e-12);
}

TEST_CASE("asymmetric table rejected", "[lattice]") {
  Grid g = make_grid(2, 1.0);
  std::vector<double> table(8, 0.0);
  table[1] = 1.0;  // v(0,0,1) alone breaks permutation symmetry
  CHECK_THROWS(build_potential_table(g, table));

  // a valid (constant) table passes
  CHECK_NOTHROW(build_potential_table(g, std::vector<double>(8, 0.7)));
}

TEST_CASE("non-even profile rejected", "[lattice]") {
  Grid g = make_grid(4, 2.0);
  CHECK_THROWS(build_potential_profile(
      g, [&](double r) { return std::sin(2 * M_PI * r / g.L); }));
}

TEST_CASE("spectral laplacian", "[lattice]") {
  Grid g = make_grid(8, 2 * M_PI);
  RMat lap = laplacian_matrix(g);

  SECTION("constant field maps to zero") {
    Field c(g, Vec::Constant(8, cplx(0.3, -0.1)));
    CHECK(max_abs(laplacian_apply(c, lap).values) < 1e-13);
  }

  SECTION("plane wave is an eigenfunction") {
    Vec v(8);
    for (int j = 0; j < 8; ++j)
      v[j] = std::exp(iu * (2.0 * M_PI * g.site(j) / g.L));
    Field f(g, v);
    Vec got = laplacian_apply(f, lap).values;
    double w = 2 * M_PI / g.L;
    CHECK(max_abs(Vec(got + w * w * v)) < 1e-12);
  }

  SECTION("hermitian and negative semidefinite") {
    CHECK(max_abs(Mat((lap - lap.transpose()).cast<cplx>())) < 1e-12);
    Field f = random_field(g, 3);
    double quad = f.values.dot(lap.cast<cplx>() * f.values).real();
    CHECK(quad <= 1e-12);
  }

  SECTION("grid refinement agreement on smooth data") {
    Grid g16 = make_grid(16, 2 * M_PI);
    Field f8 = smooth_field(g, {cplx(0.6, 0.1), cplx(0.2, -0.3), cplx(0.1, 0.05)});
    Field f16 = smooth_field(g16, {cplx(0.6, 0.1), cplx(0.2, -0.3), cplx(0.1, 0.05)});
    Vec l8 = laplacian_apply(f8, lap).values;
    Vec l16 = laplacian_apply(f16, laplacian_matrix(g16)).values;
    // compare pointwise continuum values at shared sites
    for (int j = 0; j < 8; ++j) {
      cplx a = l8[j] / std::sqrt(g.dx);
      cplx b = l16[2 * j] / std::sqrt(g16.dx);
      CHECK(std::abs(a - b) < 1e-11);
    }
  }
}

TEST_CASE("hartree nonlinearity", "[lattice]") {
  Grid g = make_grid(6, 3.0);

  SECTION("zero field") {
    Field z(g, Vec::Zero(6));
    PotentialTensor v = build_potential_constant(g, 2.0);
    CHECK(max_abs(hartree_nonlinearity(z, v).values) == 0.0);
  }

  SECTION("constant v factors into mass squared") {
    Field f = random_field(g, 11);
    f.values /= std::sqrt(f.mass());  // mass = 1
    PotentialTensor v = build_potential_constant(g, 1.0);
    Vec got = hartree_nonlinearity(f, v).values;
    CHECK(max_abs(Vec(got - 0.5 * f.values)) < 1e-13);
  }

  SECTION("matches direct triple loop") {
    Field f = random_field(g, 5);
    PotentialTensor v = build_potential_profile(
        g, [&](double r) { return 0.4 * std::cos(2 * M_PI * r / g.L); });
    Vec expect = Vec::Zero(6);
    for (int i = 0; i < 6; ++i) {
      double s = 0;
      for (int j = 0; j < 6; ++j)
        for (int l = 0; l < 6; ++l)
          s += v(i, j, l) * std::norm(f.values[j]) * std::norm(f.values[l]);
      expect[i] = 0.5 * s * f.values[i];
    }
    CHECK(max_abs(Vec(hartree_nonlinearity(f, v).values - expect)) < 1e-13);
  }

  SECTION("grid mismatch rejected") {
    Field f = random_field(make_grid(4, 3.0), 2);
    PotentialTensor v = build_potential_constant(g, 1.0);
    CHECK_THROWS(hartree_nonlinearity(f, v));
  }
}

TEST_CASE("mode convention consistency", "[lattice]") {
  Grid g = make_grid(8, 1.7);
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> un(-1.0, 1.0);

  // kernels built from continuum samples; composition must be matrix product
  auto cont = [&](int, int) { return cplx(un(gen), un(gen)); };
  Mat k1(8, 8), k2(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      k1(i, j) = cont(i, j);
      k2(i, j) = cont(i, j);
    }
  // continuum composition (K1 K2)(x,z) = sum_y dx K1(x,y) K2(y,z); in mode
  // units K_mode = dx*K this is exactly K1_mode*K2_mode.
  Mat lhs = (g.dx * k1) * (g.dx * k2);
  Mat rhs(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int l = 0; l < 8; ++l) {
      cplx s = 0;
      for (int j = 0; j < 8; ++j) s += k1(i, j) * k2(j, l) * g.dx;
      rhs(i, l) = g.dx * s;
    }
  CHECK(max_abs(Mat(lhs - rhs)) < 1e-13);

  // mass equals dx-weighted quadrature of |phi(x)|^2
  Vec cvals(8);
  for (int i = 0; i < 8; ++i) cvals[i] = cplx(un(gen), un(gen));
  Field f(g, Vec(std::sqrt(g.dx) * cvals));
  double quad = 0;
  for (int i = 0; i < 8; ++i) quad += std::norm(cvals[i]) * g.dx;
  CHECK(f.mass() == Approx(quad).epsilon(1e-13));

  // trace of a mode kernel equals the dx-weighted diagonal integral
  double tr_quad = 0;
  for (int i = 0; i < 8; ++i) tr_quad += k1(i, i).real() * g.dx;
  CHECK(Mat(g.dx * k1).trace().real() == Approx(tr_quad).epsilon(1e-13));
}
