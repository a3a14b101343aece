#ifndef PEXLAB_HARTREE_HPP
#define PEXLAB_HARTREE_HPP

// 3-body Hartree equation  i phi_t + Lap phi + 1/2 phi sum v |phi|^2 |phi|^2 = 0
// solved by Strang splitting: exact Fourier half-step for the Laplacian,
// exact local phase for the nonlinearity. Signs follow the equation verbatim
// (kinetic propagator e^{i t Lap}, not the i d/dt = -Lap convention).

#include <vector>

#include "pexlab/core.hpp"
#include "pexlab/lattice.hpp"

namespace pexlab {

inline Field hartree_rhs(const Field& phi, const PotentialTensor& v,
                         const RMat& lap) {
  require_same_grid(phi.grid, v.grid());
  Field nl = hartree_nonlinearity(phi, v);
  return Field(phi.grid, iu * (lap.cast<cplx>() * phi.values + nl.values));
}

inline double hartree_energy(const Field& phi, const PotentialTensor& v,
                             const RMat& lap) {
  double kin = -phi.values.dot(lap.cast<cplx>() * phi.values).real();
  return kin - contract_v_phi6(v, phi) / 6.0;
}

// Exact kinetic propagator e^{i tau Lap} as a dense M x M unitary.
inline Mat kinetic_propagator(const Grid& g, double tau) {
  Mat F = fourier_modes(g);
  RVec w2 = fourier_multipliers(g);
  Vec ph(g.M);
  for (int n = 0; n < g.M; ++n) ph[n] = std::exp(-iu * (w2[n] * tau));
  return F * ph.asDiagonal() * F.adjoint();
}

inline Field step_hartree(const Field& phi, const PotentialTensor& v,
                          double dt, const Mat& half_kinetic) {
  Vec cur = half_kinetic * phi.values;
  Field mid(phi.grid, std::move(cur));
  RVec v4 = contract_v_phi4(v, mid);
  for (int i = 0; i < phi.grid.M; ++i)
    mid.values[i] *= std::exp(iu * (0.5 * dt * v4[i]));
  return Field(phi.grid, half_kinetic * mid.values);
}

inline Field step_hartree(const Field& phi, const PotentialTensor& v,
                          double dt) {
  require(dt != 0.0, "step_hartree: dt must be nonzero");
  return step_hartree(phi, v, dt, kinetic_propagator(phi.grid, dt / 2));
}

struct HartreeTrajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Field> states;
  std::vector<double> mass;
  std::vector<double> energy;

  const Field& at(int n) const { return states.at(n); }
  int steps() const { return int(states.size()) - 1; }
};

inline HartreeTrajectory solve_hartree(const Field& phi0,
                                       const PotentialTensor& v, double T,
                                       double dt,
                                       double mass_drift_tol = 1e-8) {
  require(T > 0 && dt > 0, "solve_hartree: T and dt must be positive");
  int n_steps = int(std::llround(T / dt));
  require(std::abs(n_steps * dt - T) <= 1e-9 * T,
          "solve_hartree: dt must divide T");

  RMat lap = laplacian_matrix(phi0.grid);
  Mat half_kin = kinetic_propagator(phi0.grid, dt / 2);

  HartreeTrajectory tr;
  tr.dt = dt;
  tr.times.reserve(n_steps + 1);
  tr.states.reserve(n_steps + 1);
  Field cur = phi0;
  double m0 = phi0.mass();
  for (int n = 0; n <= n_steps; ++n) {
    tr.times.push_back(n * dt);
    tr.mass.push_back(cur.mass());
    tr.energy.push_back(hartree_energy(cur, v, lap));
    tr.states.push_back(cur);
    if (std::abs(tr.mass.back() - m0) > mass_drift_tol)
      throw std::runtime_error("solve_hartree: conservation breach (mass drift " +
                               std::to_string(std::abs(tr.mass.back() - m0)) +
                               "); reduce dt");
    if (n < n_steps) cur = step_hartree(cur, v, dt, half_kin);
  }
  return tr;
}

// Closed-form free evolution (v = 0), used as a test oracle and by the
// experiment module's free-case checks.
inline Field free_evolution(const Field& phi0, double t) {
  Mat prop = kinetic_propagator(phi0.grid, t);
  return Field(phi0.grid, prop * phi0.values);
}

}  // namespace pexlab

#endif
