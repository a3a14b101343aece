#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>

#include "pexlab/config.hpp"
#include "pexlab/fock_io.hpp"
#include "pexlab/report.hpp"

using namespace pexlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("config parsing and validation", "[harness]") {
  SECTION("defaults parse") {
    RunConfig c = config_from_json(json::object());
    CHECK(c.grid_M == 4);
    CHECK(c.run.N_list == std::vector<double>{2, 4, 8, 16});
  }

  SECTION("unknown keys rejected, not ignored") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"gird": {"M": 4}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json(json::parse(R"({"grid": {"M": 4, "bogus": 1}})")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json(json::parse(
            R"({"potential": {"kind": "cosine", "params": {"sigma": 1}}})")),
        std::invalid_argument);
  }

  SECTION("unknown kinds rejected at validation time") {
    CHECK_THROWS_AS(config_from_json(json::parse(
                        R"({"potential": {"kind": "asymmetric-table"}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json(json::parse(R"({"phi0": {"kind": "warp"}})")),
        std::invalid_argument);
  }

  SECTION("overrides with dotted paths") {
    json j = json::object();
    apply_override(j, "run.T=0.25");
    apply_override(j, "run.N_list=[2,4]");
    apply_override(j, "potential.kind=constant");
    apply_override(j, "potential.params.c=0.3");
    RunConfig c = config_from_json(j);
    CHECK(c.run.T == 0.25);
    CHECK(c.run.N_list == std::vector<double>{2, 4});
    CHECK(c.potential_kind == "constant");
    CHECK(c.pot_constant == 0.3);
    CHECK_THROWS(apply_override(j, "no_equals_sign"));
  }

  SECTION("built objects honor the config") {
    json j = json::parse(R"({
      "grid": {"M": 6, "L": 3.0},
      "potential": {"kind": "cosine", "params": {"amplitude": 0.2, "harmonic": 2}},
      "phi0": {"kind": "cos_mix", "params": {"c1": [0.1, -0.05], "mass": 2.0}}
    })");
    RunConfig c = config_from_json(j);
    Grid g = c.grid();
    CHECK(g.M == 6);
    PotentialTensor v = c.potential(g);
    CHECK(v.symmetry_residual() < 1e-12);
    CHECK(v.max_abs_value() <= 3 * 0.2 * 0.2 + 1e-12);
    Field f = c.initial_field(g);
    CHECK(f.mass() == Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("csv and json emission is deterministic", "[harness]") {
  auto dir = std::filesystem::temp_directory_path() / "pexlab_report_test";
  std::filesystem::remove_all(dir);

  RunConfig cfg;
  cfg.out_dir = dir.string();
  cfg.out_tag = "a";
  OutputPaths out = make_output(cfg);

  SweepResult res;
  for (int i = 0; i < 3; ++i) {
    EstimateRow r;
    r.N = 2 + i;
    r.t = 0.1 * i;
    r.lhs = 1e-3 / (i + 1);
    r.rhs = 2e-3;
    r.valid = true;
    res.rows.push_back(r);
  }
  emit_estimate_csv(out, res);
  std::string first = slurp(out.file("estimate.csv"));
  emit_estimate_csv(out, res);
  CHECK(slurp(out.file("estimate.csv")) == first);

  // an empty report still writes the header line
  SweepResult empty;
  cfg.out_tag = "empty";
  OutputPaths oute = make_output(cfg);
  emit_estimate_csv(oute, empty);
  CHECK(slurp(oute.file("estimate.csv")) ==
        "N,t,lhs,rhs,f_int,g_int,h_int,i_int,chi_phase,tail_mass,valid\n");
  cfg.out_tag = "a";

  // distinct tags keep distinct files
  cfg.out_tag = "b";
  OutputPaths out2 = make_output(cfg);
  emit_estimate_csv(out2, res);
  CHECK(std::filesystem::exists(out.file("estimate.csv")));
  CHECK(std::filesystem::exists(out2.file("estimate.csv")));
  CHECK(out.file("estimate.csv") != out2.file("estimate.csv"));

  // full precision round trip
  CHECK(fmt_full(1.0 / 3.0) == "0.33333333333333331");

  std::filesystem::remove_all(dir);
}

TEST_CASE("operator dump integrates with config spaces", "[harness]") {
  RunConfig c = config_from_json(
      json::parse(R"({"grid": {"M": 2, "L": 6.283185307179586}})"));
  Grid g = c.grid();
  FockSpace sp(2, 4);
  PotentialTensor v = c.potential(g);
  SpMat m = materialize(assemble_H(sp, g, v, 2.0).HN);
  auto path = std::filesystem::temp_directory_path() / "pexlab_hn.bin";
  dump_operator(path.string(), m, true, false);
  OperatorDump back = load_operator(path.string());
  CHECK(max_abs(Mat(Mat(back.mat) - Mat(m))) == 0.0);
  std::filesystem::remove(path);
}
