#ifndef PEXLAB_CONFIG_HPP
#define PEXLAB_CONFIG_HPP

// JSON run configuration with strict key validation (unknown keys are
// rejected, not ignored) and dotted-path overrides.

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>

#include "pexlab/lattice.hpp"
#include "pexlab/sweep.hpp"

namespace pexlab {

using json = nlohmann::ordered_json;

struct RunConfig {
  int grid_M = 4;
  double grid_L = 2 * M_PI;

  std::string potential_kind = "cosine";
  double pot_constant = 0.5;
  double pot_amplitude = 0.4;
  int pot_harmonic = 1;
  double pot_sigma = 1.0;
  std::vector<double> pot_table;

  std::string phi0_kind = "cos_mix";
  double phi0_mass = 1.0;
  int phi0_plane_n = 1;
  cplx phi0_c1{0.35, 0.0}, phi0_s1{0.0, 0.2}, phi0_c2{0.0, 0.0},
      phi0_s2{0.0, 0.0};

  SweepParams run;  // N_list, T, dt, sample_stride, jobs, tolerances
  double tol_energy_drift = 1e-8;
  double tol_lemma = 1e-9;
  double tol_coeff = 1e-6;
  double tol_hyperbolic = 1e-9;
  double slope_max = -0.4;

  int lemma_M = 2;
  int lemma_n_max = 8;
  int lemma_trials = 5;
  unsigned lemma_seed = 1;

  int cancel_n_max = 10;
  double cancel_fd_dt = 1e-3;

  std::string out_dir = "out";
  std::string out_tag;

  Grid grid() const { return make_grid(grid_M, grid_L); }

  PotentialTensor potential(const Grid& g) const {
    if (potential_kind == "zero") return build_potential_constant(g, 0.0);
    if (potential_kind == "constant") return build_potential_constant(g, pot_constant);
    if (potential_kind == "cosine")
      return build_potential_profile(g, [amp = pot_amplitude, h = pot_harmonic,
                                         L = g.L](double r) {
        return amp * std::cos(2 * M_PI * h * r / L);
      });
    if (potential_kind == "gaussian")
      return build_potential_profile(
          g, [amp = pot_amplitude, s = pot_sigma](double r) {
            return amp * std::exp(-r * r / (2 * s * s));
          });
    if (potential_kind == "table") return build_potential_table(g, pot_table);
    throw std::invalid_argument("unknown potential.kind '" + potential_kind + "'");
  }

  Field initial_field(const Grid& g) const {
    Vec v = Vec::Zero(g.M);
    if (phi0_kind == "constant") {
      v.setConstant(1.0);
    } else if (phi0_kind == "plane_wave") {
      for (int j = 0; j < g.M; ++j)
        v[j] = std::exp(iu * (2.0 * M_PI * phi0_plane_n * g.site(j) / g.L));
    } else if (phi0_kind == "cos_mix") {
      for (int j = 0; j < g.M; ++j) {
        double x = 2 * M_PI * g.site(j) / g.L;
        v[j] = 1.0 + phi0_c1 * std::cos(x) + phi0_s1 * std::sin(x) +
               phi0_c2 * std::cos(2 * x) + phi0_s2 * std::sin(2 * x);
      }
    } else {
      throw std::invalid_argument("unknown phi0.kind '" + phi0_kind + "'");
    }
    Field f(g, v);
    require(f.mass() > 0, "phi0 spec has zero mass");
    f.values *= std::sqrt(phi0_mass / f.mass());
    return f;
  }
};

namespace detail {

// schema: section -> allowed keys
inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"grid", {"M", "L"}},
      {"potential", {"kind", "params"}},
      {"phi0", {"kind", "params"}},
      {"run", {"N_list", "T", "dt", "sample_stride", "jobs"}},
      {"tol",
       {"krylov", "krylov_m", "tail_coherent", "tail_state", "mass_drift",
        "energy_drift", "lemma", "coeff", "hyperbolic", "slope_max"}},
      {"fock", {"dim_budget", "max_cutoff_bumps"}},
      {"lemma", {"M", "n_max", "trials", "seed"}},
      {"cancellation", {"n_max", "fd_dt"}},
      {"out", {"dir", "tag"}},
  };
  return s;
}

inline const std::map<std::string, std::set<std::string>>& params_schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"potential:zero", {}},
      {"potential:constant", {"c"}},
      {"potential:cosine", {"amplitude", "harmonic"}},
      {"potential:gaussian", {"amplitude", "sigma"}},
      {"potential:table", {"values"}},
      {"phi0:constant", {"mass"}},
      {"phi0:plane_wave", {"n", "mass"}},
      {"phi0:cos_mix", {"c1", "s1", "c2", "s2", "mass"}},
  };
  return s;
}

inline cplx read_cplx(const json& j) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  require(j.is_array() && j.size() == 2, "complex values are [re, im]");
  return cplx(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

inline void validate_config_keys(const json& j) {
  const auto& schema = detail::config_schema();
  for (auto& [section, body] : j.items()) {
    auto it = schema.find(section);
    if (it == schema.end())
      throw std::invalid_argument("config: unknown section '" + section + "'");
    if (!body.is_object())
      throw std::invalid_argument("config: section '" + section +
                                  "' must be an object");
    for (auto& [key, val] : body.items()) {
      if (!it->second.count(key))
        throw std::invalid_argument("config: unknown key '" + section + "." +
                                    key + "'");
      (void)val;
    }
  }
  // params bodies are validated against the selected kind
  for (std::string section : {"potential", "phi0"}) {
    if (!j.contains(section)) continue;
    std::string kind = j[section].value("kind", std::string());
    if (kind.empty()) continue;
    auto ps = detail::params_schema().find(section + ":" + kind);
    if (ps == detail::params_schema().end())
      throw std::invalid_argument("config: unknown " + section + ".kind '" +
                                  kind + "'");
    if (j[section].contains("params"))
      for (auto& [key, val] : j[section]["params"].items()) {
        if (!ps->second.count(key))
          throw std::invalid_argument("config: unknown key '" + section +
                                      ".params." + key + "' for kind '" + kind +
                                      "'");
        (void)val;
      }
  }
}

inline RunConfig config_from_json(const json& j) {
  validate_config_keys(j);
  RunConfig c;
  if (j.contains("grid")) {
    c.grid_M = j["grid"].value("M", c.grid_M);
    c.grid_L = j["grid"].value("L", c.grid_L);
  }
  if (j.contains("potential")) {
    c.potential_kind = j["potential"].value("kind", c.potential_kind);
    if (j["potential"].contains("params")) {
      const json& p = j["potential"]["params"];
      c.pot_constant = p.value("c", c.pot_constant);
      c.pot_amplitude = p.value("amplitude", c.pot_amplitude);
      c.pot_harmonic = p.value("harmonic", c.pot_harmonic);
      c.pot_sigma = p.value("sigma", c.pot_sigma);
      if (p.contains("values"))
        c.pot_table = p["values"].get<std::vector<double>>();
    }
  }
  if (j.contains("phi0")) {
    c.phi0_kind = j["phi0"].value("kind", c.phi0_kind);
    if (j["phi0"].contains("params")) {
      const json& p = j["phi0"]["params"];
      c.phi0_mass = p.value("mass", c.phi0_mass);
      c.phi0_plane_n = p.value("n", c.phi0_plane_n);
      if (p.contains("c1")) c.phi0_c1 = detail::read_cplx(p["c1"]);
      if (p.contains("s1")) c.phi0_s1 = detail::read_cplx(p["s1"]);
      if (p.contains("c2")) c.phi0_c2 = detail::read_cplx(p["c2"]);
      if (p.contains("s2")) c.phi0_s2 = detail::read_cplx(p["s2"]);
    }
  }
  if (j.contains("run")) {
    const json& r = j["run"];
    if (r.contains("N_list")) c.run.N_list = r["N_list"].get<std::vector<double>>();
    c.run.T = r.value("T", c.run.T);
    c.run.dt = r.value("dt", c.run.dt);
    c.run.sample_stride = r.value("sample_stride", c.run.sample_stride);
    c.run.jobs = r.value("jobs", c.run.jobs);
  }
  if (j.contains("tol")) {
    const json& t = j["tol"];
    c.run.krylov.tol = t.value("krylov", c.run.krylov.tol);
    c.run.krylov.m = t.value("krylov_m", c.run.krylov.m);
    c.run.tail_coherent = t.value("tail_coherent", c.run.tail_coherent);
    c.run.tail_state = t.value("tail_state", c.run.tail_state);
    c.run.mass_drift = t.value("mass_drift", c.run.mass_drift);
    c.tol_energy_drift = t.value("energy_drift", c.tol_energy_drift);
    c.tol_lemma = t.value("lemma", c.tol_lemma);
    c.tol_coeff = t.value("coeff", c.tol_coeff);
    c.tol_hyperbolic = t.value("hyperbolic", c.tol_hyperbolic);
    c.slope_max = t.value("slope_max", c.slope_max);
  }
  if (j.contains("fock")) {
    c.run.dim_budget = j["fock"].value("dim_budget", c.run.dim_budget);
    c.run.max_cutoff_bumps =
        j["fock"].value("max_cutoff_bumps", c.run.max_cutoff_bumps);
  }
  if (j.contains("lemma")) {
    c.lemma_M = j["lemma"].value("M", c.lemma_M);
    c.lemma_n_max = j["lemma"].value("n_max", c.lemma_n_max);
    c.lemma_trials = j["lemma"].value("trials", c.lemma_trials);
    c.lemma_seed = j["lemma"].value("seed", c.lemma_seed);
  }
  if (j.contains("cancellation")) {
    c.cancel_n_max = j["cancellation"].value("n_max", c.cancel_n_max);
    c.cancel_fd_dt = j["cancellation"].value("fd_dt", c.cancel_fd_dt);
  }
  if (j.contains("out")) {
    c.out_dir = j["out"].value("dir", c.out_dir);
    c.out_tag = j["out"].value("tag", c.out_tag);
  }
  return c;
}

inline json load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read config file " + path);
  return json::parse(f);
}

// `--set a.b.c=value`; the value is parsed as JSON when possible, else kept
// as a string.
inline void apply_override(json& j, const std::string& setting) {
  auto eq = setting.find('=');
  require(eq != std::string::npos, "--set expects key=value, got " + setting);
  std::string path = setting.substr(0, eq), value = setting.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (...) {
    parsed = value;
  }
  json* cur = &j;
  size_t start = 0;
  for (;;) {
    size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot - start);
    require(!key.empty(), "--set path has an empty component: " + path);
    if (dot == std::string::npos) {
      (*cur)[key] = parsed;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

}  // namespace pexlab

#endif
