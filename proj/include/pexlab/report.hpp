#ifndef PEXLAB_REPORT_HPP
#define PEXLAB_REPORT_HPP

// Deterministic CSV/JSON emission. All numbers print with %.17g so reruns of
// identical configs are byte-identical; files are namespaced by the run tag.

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pexlab/commutators.hpp"
#include "pexlab/config.hpp"
#include "pexlab/hartree.hpp"
#include "pexlab/pairex.hpp"
#include "pexlab/sweep.hpp"

namespace pexlab {

inline constexpr const char* kBasisOrderTag = "graded-desclex-v1";

inline std::string fmt_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header)
      : f_(path, std::ios::trunc) {
    if (!f_) throw std::runtime_error("cannot write " + path.string());
    f_ << header << "\n";
  }
  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i)
      f_ << (i ? "," : "") << fmt_full(values[i]);
    f_ << "\n";
  }

 private:
  std::ofstream f_;
};

struct OutputPaths {
  std::filesystem::path dir;
  std::string tag;

  std::filesystem::path file(const std::string& name) const {
    return dir / (tag.empty() ? name : tag + "_" + name);
  }
};

inline OutputPaths make_output(const RunConfig& cfg,
                               const std::string& dir_override = "") {
  OutputPaths out;
  out.dir = dir_override.empty() ? cfg.out_dir : dir_override;
  out.tag = cfg.out_tag;
  std::filesystem::create_directories(out.dir);
  return out;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

inline void emit_estimate_csv(const OutputPaths& out,
                              const SweepResult& res) {
  CsvWriter csv(out.file("estimate.csv"),
                "N,t,lhs,rhs,f_int,g_int,h_int,i_int,chi_phase,tail_mass,valid");
  for (const auto& r : res.rows)
    csv.row({r.N, r.t, r.lhs, r.rhs, r.f_int, r.g_int, r.h_int, r.i_int,
             r.chi_phase, r.tail_mass, r.valid ? 1.0 : 0.0});
}

inline void emit_norms_csv(const OutputPaths& out,
                           const std::vector<NormPoint>& series) {
  CsvWriter csv(out.file("norms.csv"), "t,f,g,h,i");
  for (const auto& n : series) csv.row({n.t, n.f, n.g, n.h, n.i});
}

inline void emit_hartree_csv(const OutputPaths& out,
                             const HartreeTrajectory& tr, int stride = 1) {
  CsvWriter csv(out.file("hartree.csv"), "t,mass,energy");
  for (size_t n = 0; n < tr.times.size(); n += stride)
    csv.row({tr.times[n], tr.mass[n], tr.energy[n]});
}

inline void emit_hartree_state(const OutputPaths& out, const Field& f) {
  json j;
  j["M"] = f.grid.M;
  j["L"] = f.grid.L;
  json re = json::array(), im = json::array();
  for (int i = 0; i < f.grid.M; ++i) {
    re.push_back(f.values[i].real());
    im.push_back(f.values[i].imag());
  }
  j["re"] = re;
  j["im"] = im;
  write_json(out.file("hartree_state.json"), j);
}

inline void emit_pairex_csv(const OutputPaths& out, const PairTrajectory& tr,
                            int stride = 1) {
  CsvWriter csv(out.file("pairex.csv"),
                "t,k_norm,u_norm,hyp_residual,coeff_residual,chi0,chi1");
  for (size_t n = 0; n < tr.steps.size(); n += stride) {
    const auto& s = tr.steps[n];
    csv.row({s.state.t, s.state.k.norm(), s.state.u.norm(), s.hyp_residual,
             s.coeff_residual_norm, s.chi0_val, s.chi1_val});
  }
}

// Wall times live in a separate timings file so every other output stays
// byte-identical across reruns of the same config.
inline json lemma_report_json(const std::vector<LemmaReport>& reports) {
  json arr = json::array();
  double worst = 0.0;
  for (const auto& rep : reports) {
    json levels = json::array();
    for (int lv = 0; lv < 6; ++lv)
      levels.push_back({{"level", lv + 1},
                        {"abs_deviation", rep.abs_deviation[lv]},
                        {"rel_deviation", rep.rel_deviation[lv]},
                        {"oracle_scale", rep.oracle_scale[lv]}});
    arr.push_back({{"M", rep.M},
                   {"n_max", rep.n_max},
                   {"dim", rep.dim},
                   {"guarded_sector_dim", rep.sector_dim},
                   {"levels", levels},
                   {"level6_scalar_closed", rep.level6_scalar_closed},
                   {"level6_scalar_oracle", rep.level6_scalar_oracle},
                   {"level6_identity_defect", rep.level6_identity_defect},
                   {"level6_imag", rep.level6_imag}});
    worst = std::max(worst, rep.max_rel_deviation());
  }
  return json{{"trials", arr}, {"max_rel_deviation", worst}};
}

inline void emit_timings(const OutputPaths& out, const json& timings) {
  write_json(out.file("timings.json"), timings);
}

inline void emit_cancellation_csv(
    const OutputPaths& out,
    const std::vector<std::pair<double, CancellationReport>>& rows,
    double fd_dt) {
  CsvWriter csv(out.file("cancellation.csv"),
                "t,kernel_residual,op_residual,route_difference,vac_diag_re,"
                "vac_diag_im,chi1_kernel,fd_dt");
  for (const auto& [t, rep] : rows)
    csv.row({t, rep.kernel_residual, rep.op_residual, rep.route_difference,
             rep.vacuum_diagonal.real(), rep.vacuum_diagonal.imag(),
             rep.chi1_kernel, fd_dt});
}

// machine-readable run summary: tolerance set, basis tag, gates
inline json summary_base(const RunConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  j["basis_order"] = kBasisOrderTag;
  j["grid"] = {{"M", cfg.grid_M}, {"L", cfg.grid_L}};
  j["run"] = {{"T", cfg.run.T},
              {"dt", cfg.run.dt},
              {"sample_stride", cfg.run.sample_stride},
              {"N_list", cfg.run.N_list}};
  j["tolerances"] = {{"krylov", cfg.run.krylov.tol},
                     {"krylov_m", cfg.run.krylov.m},
                     {"tail_coherent", cfg.run.tail_coherent},
                     {"tail_state", cfg.run.tail_state},
                     {"mass_drift", cfg.run.mass_drift},
                     {"energy_drift", cfg.tol_energy_drift},
                     {"lemma", cfg.tol_lemma},
                     {"coeff", cfg.tol_coeff},
                     {"hyperbolic", cfg.tol_hyperbolic},
                     {"slope_max", cfg.slope_max}};
  j["potential"] = {{"kind", cfg.potential_kind}};
  j["phi0"] = {{"kind", cfg.phi0_kind}};
  return j;
}

}  // namespace pexlab

#endif
