#include <catch2/catch.hpp>

#include <random>

#include "pexlab/hartree.hpp"

using namespace pexlab;

namespace {

Field smooth_normalized(const Grid& g, unsigned seed = 1) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> un(-0.5, 0.5);
  Vec v = Vec::Zero(g.M);
  for (int n = -2; n <= 2; ++n) {
    cplx a(un(gen), un(gen));
    if (n == 0) a += 1.0;
    for (int j = 0; j < g.M; ++j)
      v[j] += a * std::exp(iu * (2.0 * M_PI * n * g.site(j) / g.L));
  }
  v *= std::sqrt(g.dx);
  Field f(g, v);
  f.values /= std::sqrt(f.mass());
  return f;
}

PotentialTensor smooth_potential(const Grid& g, double amp = 0.4) {
  return build_potential_profile(
      g, [&, amp](double r) { return amp * std::cos(2 * M_PI * r / g.L); });
}

}  // namespace

TEST_CASE("hartree_rhs free plane wave", "[hartree]") {
  Grid g = make_grid(8, 2 * M_PI);
  PotentialTensor v0 = build_potential_constant(g, 0.0);
  RMat lap = laplacian_matrix(g);
  Vec pw(8);
  for (int j = 0; j < 8; ++j)
    pw[j] = std::exp(iu * (2.0 * M_PI * g.site(j) / g.L));
  Field f(g, pw);
  Vec got = hartree_rhs(f, v0, lap).values;
  double w = 2 * M_PI / g.L;
  CHECK(max_abs(Vec(got + iu * (w * w) * pw)) < 1e-12);

  Field z(g, Vec::Zero(8));
  CHECK(max_abs(hartree_rhs(z, v0, lap).values) == 0.0);
}

TEST_CASE("hartree_rhs matches brute-force rearrangement", "[hartree]") {
  Grid g = make_grid(6, 3.1);
  PotentialTensor v = smooth_potential(g);
  RMat lap = laplacian_matrix(g);
  Field f = smooth_normalized(g, 5);
  Vec rhs = hartree_rhs(f, v, lap).values;
  // phi_t from i phi_t + lap phi + nl = 0, assembled independently
  Vec nl = Vec::Zero(6);
  for (int i = 0; i < 6; ++i) {
    double s = 0;
    for (int j = 0; j < 6; ++j)
      for (int l = 0; l < 6; ++l)
        s += v(i, j, l) * std::norm(f.values[j]) * std::norm(f.values[l]);
    nl[i] = 0.5 * s * f.values[i];
  }
  Vec expect = iu * (lap.cast<cplx>() * f.values + nl);
  CHECK(max_abs(Vec(rhs - expect)) < 1e-13);
}

TEST_CASE("strang step conserves mass and reverses", "[hartree]") {
  Grid g = make_grid(8, 2 * M_PI);
  PotentialTensor v = smooth_potential(g);
  Field f = smooth_normalized(g, 2);
  double m0 = f.mass();
  Field g1 = step_hartree(f, v, 1e-2);
  CHECK(std::abs(g1.mass() - m0) < 1e-13);
  Field back = step_hartree(g1, v, -1e-2);
  CHECK(max_abs(Vec(back.values - f.values)) < 1e-12);
}

TEST_CASE("free propagation is exact", "[hartree]") {
  Grid g = make_grid(8, 2 * M_PI);
  PotentialTensor v0 = build_potential_constant(g, 0.0);
  Field f = smooth_normalized(g, 3);
  HartreeTrajectory tr = solve_hartree(f, v0, 0.5, 1e-2);
  Field exact = free_evolution(f, 0.5);
  CHECK(max_abs(Vec(tr.states.back().values - exact.values)) < 1e-12);
}

TEST_CASE("constant v reduces to a global phase", "[hartree]") {
  Grid g = make_grid(8, 2 * M_PI);
  PotentialTensor v1 = build_potential_constant(g, 1.0);
  Field f = smooth_normalized(g, 4);  // mass 1
  double T = 0.3;
  HartreeTrajectory tr = solve_hartree(f, v1, T, 1e-3);
  Field fr = free_evolution(f, T);
  // nonlinearity acts as the uniform phase exp(i mass^2 t / 2)
  Vec expect = std::exp(iu * (0.5 * T)) * fr.values;
  CHECK(max_abs(Vec(tr.states.back().values - expect)) < 1e-10);
  for (size_t n = 0; n < tr.states.size(); n += 50) {
    Field fn = free_evolution(f, tr.times[n]);
    for (int j = 0; j < 8; ++j)
      CHECK(std::abs(std::abs(tr.states[n].values[j]) - std::abs(fn.values[j])) <
            1e-10);
  }
}

TEST_CASE("strang order and conservation", "[hartree]") {
  Grid g = make_grid(8, 2 * M_PI);
  PotentialTensor v = smooth_potential(g);
  Field f = smooth_normalized(g, 6);
  double T = 0.25;

  auto endpoint = [&](double dt) {
    return solve_hartree(f, v, T, dt).states.back().values;
  };
  Vec ref = endpoint(T / 2048);
  double e1 = max_abs(Vec(endpoint(T / 64) - ref));
  double e2 = max_abs(Vec(endpoint(T / 128) - ref));
  double order = std::log2(e1 / e2);
  CHECK(order > 1.9);
  CHECK(order < 2.5);

  HartreeTrajectory tr = solve_hartree(f, v, 1.0, 1e-3);
  double dm = 0, de = 0;
  for (size_t n = 0; n < tr.times.size(); ++n) {
    dm = std::max(dm, std::abs(tr.mass[n] - tr.mass[0]));
    de = std::max(de, std::abs(tr.energy[n] - tr.energy[0]));
  }
  CHECK(dm < 1e-10);
  CHECK(de < 1e-8);
}

TEST_CASE("hartree energy values", "[hartree]") {
  Grid g = make_grid(6, 2 * M_PI);
  RMat lap = laplacian_matrix(g);
  PotentialTensor v1 = build_potential_constant(g, 1.0);

  Field z(g, Vec::Zero(6));
  CHECK(hartree_energy(z, v1, lap) == 0.0);

  Field c(g, Vec::Constant(6, std::sqrt(1.0 / 6)));  // constant, mass 1
  CHECK(hartree_energy(c, v1, lap) == Approx(-1.0 / 6).margin(1e-12));
}

TEST_CASE("solve_hartree validates arguments", "[hartree]") {
  Grid g = make_grid(4, 1.0);
  PotentialTensor v = build_potential_constant(g, 0.0);
  Field f(g, Vec::Constant(4, 0.5));
  CHECK_THROWS(solve_hartree(f, v, -1.0, 1e-3));
  CHECK_THROWS(solve_hartree(f, v, 1.0, 3e-4));  // dt does not divide T
}
