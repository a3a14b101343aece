#include <catch2/catch.hpp>

#include <random>

#include "pexlab/sweep.hpp"

using namespace pexlab;

namespace {

Field smooth_phi0(const Grid& g) {
  Vec v(g.M);
  for (int j = 0; j < g.M; ++j) {
    double x = 2 * M_PI * g.site(j) / g.L;
    v[j] = 1.0 + 0.35 * std::cos(x) + cplx(0, 0.2) * std::sin(x);
  }
  Field f(g, v);
  f.values /= std::sqrt(f.mass());
  return f;
}

PotentialTensor cos_potential(const Grid& g, double amp = 0.4) {
  return build_potential_profile(
      g, [&, amp](double r) { return amp * std::cos(2 * M_PI * r / g.L); });
}

Mat random_symmetric(int M, unsigned seed, double scale) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  Mat k(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = i; j < M; ++j) {
      k(i, j) = scale * cplx(un(gen), un(gen));
      k(j, i) = k(i, j);
    }
  return k;
}

}  // namespace

TEST_CASE("conjugated norms", "[experiment]") {
  Grid g = make_grid(2, 2 * M_PI);
  FockSpace sp(2, 10);
  Field phi = smooth_phi0(g);
  PotentialTensor v = cos_potential(g);

  SECTION("k = 0 reduces to norms on the vacuum; V Omega = 0") {
    NormPoint np = conjugated_norms(sp, g, phi, v, Mat(Mat::Zero(2, 2)));
    CHECK(np.g == 0.0);  // V annihilates the vacuum
    CHECK(np.f == 0.0);  // level 1 ends in annihilations
    CHECK(np.h == 0.0);
    CHECK(np.i > 0.0);   // level 3 has the pure creation family
  }

  SECTION("zero field kills the commutator norms") {
    Field z(g, Vec::Zero(2));
    Mat k = random_symmetric(2, 3, 0.2);
    NormPoint np = conjugated_norms(sp, g, z, v, k);
    CHECK(np.f == 0.0);
    CHECK(np.h == 0.0);
    CHECK(np.i == 0.0);
    CHECK(np.g > 0.0);  // V e^-B Omega has 4-particle content
  }

  SECTION("final rotation does not change the norms") {
    Mat k = random_symmetric(2, 5, 0.3);
    NormPoint with = conjugated_norms(sp, g, phi, v, k, {}, true);
    NormPoint without = conjugated_norms(sp, g, phi, v, k, {}, false);
    CHECK(std::abs(with.f - without.f) < 1e-10);
    CHECK(std::abs(with.g - without.g) < 1e-10);
    CHECK(std::abs(with.h - without.h) < 1e-10);
    CHECK(std::abs(with.i - without.i) < 1e-10);
  }
}

TEST_CASE("rhs bound arithmetic", "[experiment]") {
  CHECK(rhs_bound(0, 0, 0, 0, 7.0) == 0.0);
  CHECK(rhs_bound(1, 1, 1, 1, 1.0) ==
        Approx(1.0 / 6 + 1.0 / 6 + 1.0 / 12 + 1.0 / 36).epsilon(1e-15));
  // N -> 4N scales the i-term by 1/2 and the f-term by 1/8
  double N = 3.0;
  CHECK(rhs_bound(1, 0, 0, 0, 4 * N) ==
        Approx(rhs_bound(1, 0, 0, 0, N) / 8).epsilon(1e-13));
  CHECK(rhs_bound(0, 0, 0, 1, 4 * N) ==
        Approx(rhs_bound(0, 0, 0, 1, N) / 2).epsilon(1e-13));
}

TEST_CASE("ltilde identity", "[experiment]") {
  Grid g = make_grid(3, 2 * M_PI);
  FockSpace sp(3, 9);
  Field phi = smooth_phi0(g);
  PotentialTensor v = cos_potential(g);

  SECTION("random desk-scale state") {
    Mat k = random_symmetric(3, 7, 0.25);
    Mat d = random_symmetric(3, 8, 0.5);  // any kernel: the identity is structural
    LtildeReport rep = ltilde_check(sp, g, phi, v, k, d, 4.0);
    CHECK(rep.identity_residual < 1e-8);
    CHECK(rep.quadratic_on_vacuum == 0.0);
    CHECK(rep.hg_hermiticity < 1e-12);
    CHECK(rep.four_term_norm > 0.0);
  }

  SECTION("phi = 0 and k = 0 gives Ltilde Omega = 0") {
    Field z(g, Vec::Zero(3));
    LtildeReport rep = ltilde_check(sp, g, z, v, Mat(Mat::Zero(3, 3)),
                                    Mat(Mat::Zero(3, 3)), 4.0);
    CHECK(rep.identity_residual == 0.0);
    CHECK(rep.four_term_norm == 0.0);  // V Omega = 0 and commutators vanish
  }
}

TEST_CASE("cancellation check routes", "[experiment]") {
  Grid g = make_grid(2, 2 * M_PI);
  FockSpace sp(2, 12);
  Field phi = smooth_phi0(g);
  PotentialTensor v = cos_potential(g);
  RMat lap = laplacian_matrix(g);
  Mat gk = kernel_g(phi, v, lap), mk = kernel_m(phi, v);
  Mat k = random_symmetric(2, 11, 0.2);

  SECTION("non-solving kdot: both routes agree on a nonzero coefficient") {
    CancellationReport rep =
        cancellation_check(sp, g, phi, v, k, Mat(Mat::Zero(2, 2)), 1e-3);
    CHECK(rep.kernel_residual > 1e-2);
    CHECK(rep.route_difference < 1e-4 * std::max(1.0, rep.kernel_residual));
  }

  SECTION("solved kdot: coefficients drop out on both routes") {
    StageSolution st = solve_kdot(k, gk, mk);
    CancellationReport rep = cancellation_check(sp, g, phi, v, k, st.kdot, 1e-3);
    CHECK(rep.kernel_residual < 1e-10);
    CHECK(rep.op_residual < 1e-4);
    CHECK(std::abs(rep.vacuum_diagonal.real() - rep.chi1_kernel) < 1e-5);
  }

  SECTION("zero potential: everything vanishes") {
    PotentialTensor v0 = build_potential_constant(g, 0.0);
    CancellationReport rep = cancellation_check(
        sp, g, phi, v0, Mat(Mat::Zero(2, 2)), Mat(Mat::Zero(2, 2)), 1e-3);
    CHECK(rep.kernel_residual < 1e-14);
    CHECK(rep.op_residual < 1e-12);
  }
}

TEST_CASE("free-field sweep is exact", "[experiment]") {
  Grid g = make_grid(2, 2 * M_PI);
  PotentialTensor v0 = build_potential_constant(g, 0.0);
  Field phi0 = smooth_phi0(g);
  SweepParams p;
  p.N_list = {2, 4, 8};
  p.T = 0.2;
  p.dt = 1e-3;
  p.sample_stride = 50;
  SweepResult res = run_sweep(g, v0, phi0, p);
  REQUIRE(!res.rows.empty());
  for (const auto& r : res.rows) {
    CHECK(r.valid);
    CHECK(r.lhs < 1e-8);  // coherent states transport exactly under H0
    CHECK(r.rhs < 1e-12);
    CHECK(r.chi_phase == 0.0);
  }
  CHECK(!res.slope_defined);
}

TEST_CASE("small sweep satisfies the estimate", "[experiment]") {
  Grid g = make_grid(2, 2 * M_PI);
  PotentialTensor v = cos_potential(g);
  Field phi0 = smooth_phi0(g);
  SweepParams p;
  p.N_list = {2, 4, 8, 16};
  p.T = 0.2;
  p.dt = 1e-3;
  p.sample_stride = 25;
  SweepResult res = run_sweep(g, v, phi0, p);

  int valid_rows = 0;
  for (const auto& r : res.rows) {
    if (!r.valid) continue;
    ++valid_rows;
    CHECK(r.lhs <= r.rhs + r.slack);
  }
  CHECK(valid_rows == int(p.N_list.size()) * 9);
  REQUIRE(res.slope_defined);
  CHECK(res.slope <= -0.4);

  SECTION("rows are deterministic across reruns") {
    SweepResult res2 = run_sweep(g, v, phi0, p);
    REQUIRE(res2.rows.size() == res.rows.size());
    for (size_t i = 0; i < res.rows.size(); ++i) {
      CHECK(res.rows[i].lhs == res2.rows[i].lhs);
      CHECK(res.rows[i].rhs == res2.rows[i].rhs);
      CHECK(res.rows[i].chi_phase == res2.rows[i].chi_phase);
    }
  }
}

TEST_CASE("omitting the phase increases the error", "[experiment]") {
  Grid g = make_grid(2, 2 * M_PI);
  PotentialTensor v = cos_potential(g);
  Field phi0 = smooth_phi0(g);
  double T = 0.2, dt = 1e-3, N = 6.0;
  FockSpace sp(2, 24);
  HartreeTrajectory half = solve_hartree(phi0, v, T, dt / 2);
  PairTrajectory ptr = solve_pairex(half, v, T, dt);

  auto ham = assemble_H(sp, g, v, N);
  Vec psi_exact = evolve(ham.HN, coherent_state(sp, phi0, N), T);
  const PairStep& last = ptr.steps.back();
  Vec w = apply_exp(op_B(sp, Kernel(g, last.state.k)), -1.0, sp.vacuum());
  Vec approx = apply_exp(op_A(sp, half.states.back()), -std::sqrt(N), w);

  double theta = N * last.theta0 - last.theta1;
  double with_phase = (std::exp(-iu * theta) * approx - psi_exact).norm();
  double without_phase = (approx - psi_exact).norm();
  CHECK(with_phase < without_phase);
  CHECK(without_phase > 2.0 * with_phase);  // the phase genuinely matters here
}
