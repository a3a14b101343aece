#ifndef PEXLAB_SWEEP_HPP
#define PEXLAB_SWEEP_HPP

// The N-sweep: builds both sides of the estimate per (N, t), gates rows on
// truncation tails, and fits the log-log slope of the final-time error.
// Hartree and k trajectories are solved once and shared across N; only
// Fock-space objects rescale with N. Workers are embarrassingly parallel and
// merge deterministically in N order.

#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <thread>

#include "pexlab/experiment.hpp"

namespace pexlab {

struct SweepParams {
  std::vector<double> N_list{2, 4, 8, 16};
  double T = 0.5;
  double dt = 1e-3;
  int sample_stride = 5;   // rows every sample_stride * dt
  int jobs = 0;            // 0 = one worker per N
  KrylovOptions krylov{};
  double tail_coherent = 1e-8;
  double tail_state = 1e-6;
  double mass_drift = 1e-8;
  std::int64_t dim_budget = 2'000'000;
  int max_cutoff_bumps = 6;
};

struct EstimateRow {
  double N = 0, t = 0;
  double lhs = 0, rhs = 0;
  double f_int = 0, g_int = 0, h_int = 0, i_int = 0;
  double chi_phase = 0;
  double tail_mass = 0;
  double slack = 0;
  bool valid = false;
};

struct SweepNInfo {
  double N = 0;
  int n_max = 0;
  std::int64_t dim = 0;
  double coherent_tail = 0.0;
  bool coherent_ok = false;
  double runtime_sec = 0.0;
};

struct SweepResult {
  std::vector<EstimateRow> rows;  // sorted by (N, t)
  std::vector<SweepNInfo> per_n;
  double slope = 0.0;       // log-log slope of lhs(T) vs N
  bool slope_defined = false;
};

// Cutoff rule n_max = N + ceil(6 sqrt(N)) + 4, bumped until the coherent tail
// clears the gate.
inline int cutoff_rule(double N, int bump = 0) {
  return int(std::ceil(N)) + int(std::ceil(6.0 * std::sqrt(N))) + 4 + 2 * bump;
}

namespace detail {

struct NWorkerOutput {
  std::vector<EstimateRow> rows;
  SweepNInfo info;
};

inline NWorkerOutput run_single_N(const Grid& grid, const PotentialTensor& v,
                                  const HartreeTrajectory& half,
                                  const PairTrajectory& ptr, double N,
                                  const SweepParams& p) {
  auto t_start = std::chrono::steady_clock::now();
  NWorkerOutput out;
  out.info.N = N;

  // raise the cutoff until the initial coherent state passes the tail gate
  int n_max = cutoff_rule(N);
  std::unique_ptr<FockSpace> sp;
  Vec psi0;
  double coh_tail = 1.0;
  for (int bump = 0; bump <= p.max_cutoff_bumps; ++bump) {
    n_max = cutoff_rule(N, bump);
    sp = std::make_unique<FockSpace>(grid.M, n_max, p.dim_budget);
    psi0 = coherent_state(*sp, half.states[0], N, p.krylov);
    coh_tail = sp->tail_mass(psi0, n_max - 1);
    if (coh_tail < p.tail_coherent) break;
  }
  out.info.n_max = n_max;
  out.info.dim = sp->dim();
  out.info.coherent_tail = coh_tail;
  out.info.coherent_ok = coh_tail < p.tail_coherent;

  auto ham = assemble_H(*sp, grid, v, N);
  FockOperator V = op_diagonal(*sp, v_diagonal(*sp, v));

  const int n_steps = int(std::llround(p.T / p.dt));
  const int stride = p.sample_stride;

  Vec psi_exact = psi0;
  double f_int = 0, g_int = 0, h_int = 0, i_int = 0;
  NormPoint prev{};
  for (int s = 0; s <= n_steps; s += stride) {
    double t = s * p.dt;
    const Field& phi = half.states[2 * s];
    const PairStep& ks = ptr.steps[s];

    bool zero_k = max_abs(ks.state.k) == 0.0;
    Vec w = sp->vacuum();
    FockOperator B;
    if (!zero_k) {
      B = op_B(*sp, Kernel(grid, ks.state.k));
      w = apply_exp(B, -1.0, w, p.krylov);
    }

    NormPoint np;
    np.t = t;
    np.g = V.apply(w).norm();
    np.f = closed_form(*sp, grid, phi, v, 1).apply(w).norm();
    np.h = closed_form(*sp, grid, phi, v, 2).apply(w).norm();
    np.i = closed_form(*sp, grid, phi, v, 3).apply(w).norm();
    if (s > 0) {
      double hstep = stride * p.dt;
      f_int += 0.5 * (prev.f + np.f) * hstep;
      g_int += 0.5 * (prev.g + np.g) * hstep;
      h_int += 0.5 * (prev.h + np.h) * hstep;
      i_int += 0.5 * (prev.i + np.i) * hstep;
    }
    prev = np;

    Vec psi_approx = apply_exp(op_A(*sp, phi), -std::sqrt(N), w, p.krylov);
    // Global phase rate N chi0 - chi1: the vacuum diagonal of L_Q is
    // -1/2 tr d = chi1, so the generator seen by Psi is Ltilde - N chi0 + chi1
    // and the matching phase in the error is exp(-i int (N chi0 - chi1)).
    double theta = N * ks.theta0 - ks.theta1;
    psi_approx *= std::exp(-iu * theta);

    EstimateRow row;
    row.N = N;
    row.t = t;
    row.lhs = (psi_approx - psi_exact).norm();
    row.rhs = rhs_bound(f_int, g_int, h_int, i_int, N);
    row.f_int = f_int;
    row.g_int = g_int;
    row.h_int = h_int;
    row.i_int = i_int;
    row.chi_phase = theta;
    double tail_e = sp->tail_mass(psi_exact, n_max - 1);
    double tail_a = sp->tail_mass(psi_approx, n_max - 1);
    row.tail_mass = std::max(tail_e, tail_a);
    row.valid = out.info.coherent_ok && tail_e < p.tail_state &&
                tail_a < p.tail_state;
    row.slack = 1e-7 + 2.0 * (std::sqrt(tail_e) + std::sqrt(tail_a)) +
                100.0 * p.krylov.tol + 1e-6 * row.rhs;
    out.rows.push_back(row);

    if (s + stride <= n_steps)
      psi_exact = evolve(ham.HN, psi_exact, stride * p.dt, p.krylov);
  }
  out.info.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

}  // namespace detail

inline SweepResult run_sweep(const Grid& grid, const PotentialTensor& v,
                             const Field& phi0, const SweepParams& p) {
  require(!p.N_list.empty(), "run_sweep: N list must be nonempty");
  const int n_steps = int(std::llround(p.T / p.dt));
  require(p.sample_stride >= 1 && n_steps % p.sample_stride == 0,
          "run_sweep: sample_stride must divide T/dt");

  HartreeTrajectory half = solve_hartree(phi0, v, p.T, p.dt / 2, p.mass_drift);
  PairTrajectory ptr = solve_pairex(half, v, p.T, p.dt);

  std::vector<detail::NWorkerOutput> outputs(p.N_list.size());
  int jobs = p.jobs > 0 ? p.jobs : int(p.N_list.size());
  jobs = std::min<int>(jobs, int(p.N_list.size()));

  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (;;) {
        size_t idx = next.fetch_add(1);
        if (idx >= p.N_list.size()) return;
        outputs[idx] =
            detail::run_single_N(grid, v, half, ptr, p.N_list[idx], p);
      }
    });
  for (auto& th : pool) th.join();

  SweepResult res;
  for (auto& o : outputs) {
    res.per_n.push_back(o.info);
    res.rows.insert(res.rows.end(), o.rows.begin(), o.rows.end());
  }

  // slope of log lhs(T) vs log N over valid final rows
  std::vector<std::pair<double, double>> pts;
  for (auto& r : res.rows)
    if (r.valid && std::abs(r.t - p.T) < 1e-12 && r.lhs > 1e-9)
      pts.emplace_back(std::log(r.N), std::log(r.lhs));
  if (pts.size() >= 2) {
    double mx = 0, my = 0;
    for (auto& [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
    }
    if (sxx > 0) {
      res.slope = sxy / sxx;
      res.slope_defined = true;
    }
  }
  return res;
}

// The four norm series alone (the `norms` command); N enters only through the
// cutoff rule.
inline std::vector<NormPoint> norms_series(const Grid& grid,
                                           const PotentialTensor& v,
                                           const Field& phi0,
                                           const SweepParams& p,
                                           double N_for_cutoff) {
  const int n_steps = int(std::llround(p.T / p.dt));
  require(p.sample_stride >= 1 && n_steps % p.sample_stride == 0,
          "norms_series: sample_stride must divide T/dt");
  HartreeTrajectory half = solve_hartree(phi0, v, p.T, p.dt / 2, p.mass_drift);
  PairTrajectory ptr = solve_pairex(half, v, p.T, p.dt);
  FockSpace sp(grid.M, cutoff_rule(N_for_cutoff), p.dim_budget);
  std::vector<NormPoint> out;
  for (int s = 0; s <= n_steps; s += p.sample_stride) {
    NormPoint np = conjugated_norms(sp, grid, half.states[2 * s], v,
                                    ptr.steps[s].state.k, p.krylov,
                                    /*apply_final_rotation=*/false);
    np.t = s * p.dt;
    out.push_back(np);
  }
  return out;
}

}  // namespace pexlab

#endif
