#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lowmach/cli.hpp"
#include "lowmach/errors.hpp"
#include "lowmach/harness.hpp"

using namespace lowmach;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lowmach_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

LabConfig tiny_sweep() {
  LabConfig c = parse_config(json{{"scaling", {{"alpha", 2.0}, {"m", 1.0}}},
                                  {"grid", {{"cells", 48}}},
                                  {"time", {{"final_time", 0.02}, {"sample_interval", 0.01}}}});
  return c;
}

}  // namespace

TEST_CASE("config defaults, overrides and unknown keys") {
  const LabConfig d = parse_config(json::object());
  CHECK(d.cells == 128);
  CHECK(d.thermo.mu0 == 0.01);
  CHECK(d.sweep_epsilons == std::vector<double>{0.5, 0.4, 0.3});

  const LabConfig c = parse_config(json{{"grid", {{"cells", 32}}}, {"thermo", {{"a_rad", 0.0}}}});
  CHECK(c.cells == 32);
  CHECK(c.thermo.a_rad == 0.0);

  CHECK_THROWS_AS(parse_config(json{{"grid", {{"cellz", 32}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"gird", json::object()}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"grid", {{"cells", "many"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"time", {{"final_time", -1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"geometry", {{"placement", "hexagonal"}}}}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

  // Serialization round trip.
  const LabConfig r = parse_config(to_json(c));
  CHECK(to_json(r) == to_json(c));
}

TEST_CASE("trapezoidal L2 in time") {
  CHECK(l2_in_time({0.0, 1.0}, {2.0, 2.0}) == doctest::Approx(2.0));
  // v = t on [0, 1]: trapezoid of t^2 with two panels is 3/8.
  CHECK(l2_in_time({0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}) == doctest::Approx(std::sqrt(0.375)));
  CHECK_THROWS_AS(l2_in_time({0.0}, {1.0, 2.0}), AlignmentError);
}

TEST_CASE("sweep needs three distinct epsilons") {
  LabConfig c = tiny_sweep();
  c.sweep_epsilons = {0.5, 0.4};
  CHECK_THROWS_AS(sweep(c), FitError);
  c.sweep_epsilons = {0.5, 0.4, 0.4};
  CHECK_THROWS_AS(sweep(c), FitError);
}

TEST_CASE("sweep report: sorted rows, theory flags, failure rows keep every column") {
  LabConfig c = tiny_sweep();
  // eps = 0.9 cannot hold a hole with alpha = 2 in the unit box.
  c.sweep_epsilons = {0.3, 0.9, 0.5, 0.4};
  const ConvergenceReport r = sweep(c);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].epsilon == 0.9);
  CHECK(r.rows[3].epsilon == 0.3);
  CHECK(r.regime == "relaxed");
  CHECK_FALSE(r.theory_flags);
  CHECK(r.rows[0].status == "failed");
  CHECK(std::isnan(r.rows[0].velocity_gap));
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(r.rows[i].status == "ok");
    CHECK(std::isfinite(r.rows[i].velocity_gap));
    CHECK(r.rows[i].m_res_max == 0.0);
    const PerforatedGeometry g = lab_geometry(c, r.rows[i].epsilon);
    CHECK(r.rows[i].m_holes == hole_measure(g).analytic);
    CHECK(r.rows[i].n_holes == g.count());
  }

  const json j = sweep_json(r);
  for (const json& row : j.at("rows")) {
    for (const std::string& col : sweep_columns()) CHECK(row.contains(col));
  }
  CHECK(j.at("rows")[0].at("velocity_gap").is_null());
  CHECK(j.at("monotone").contains("velocity_gap"));

  const fs::path dir = scratch("sweep");
  write_sweep_csv((dir / "a.csv").string(), r);
  std::istringstream csv(slurp(dir / "a.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') + 1 == static_cast<long>(sweep_columns().size()));
    ++lines;
  }
  CHECK(lines == 5);
}

TEST_CASE("theory flags follow the configured scaling") {
  LabConfig c = tiny_sweep();
  c.scaling.alpha = 3.5;
  c.scaling.m = 4.0;
  CHECK(c.scaling.theory_regime());
  c.scaling.alpha = 2.0;
  c.scaling.m = 1.0;
  CHECK_FALSE(c.scaling.theory_regime());
}

TEST_CASE("identical configuration gives byte-identical reports") {
  LabConfig c = tiny_sweep();
  c.workers = 2;
  const fs::path dir = scratch("determinism");
  for (const char* tag : {"x", "y"}) {
    const ConvergenceReport r = sweep(c);
    write_sweep_csv((dir / (std::string(tag) + ".csv")).string(), r);
    write_json((dir / (std::string(tag) + ".json")).string(), sweep_json(r));
  }
  CHECK(slurp(dir / "x.csv") == slurp(dir / "y.csv"));
  CHECK(slurp(dir / "x.json") == slurp(dir / "y.json"));
}

TEST_CASE("gamma map and residual report layout") {
  const auto cells = gamma_map(10, 2.0, 6.0, 2.0, 6.0);
  CHECK(cells.size() == 100);
  for (const auto& c : cells) CHECK(c.gamma.all_positive() == c.theory);
  const fs::path dir = scratch("gamma");
  write_gamma_map_csv((dir / "g.csv").string(), cells);
  std::istringstream in(slurp(dir / "g.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "m,alpha,gamma1,gamma2,gamma3,all_positive,theory_region");
}

TEST_CASE("trajectory round trip and compare report") {
  LabConfig c = parse_config(json{{"grid", {{"cells", 24}}},
                                  {"time", {{"final_time", 0.1}, {"sample_interval", 0.05}}}});
  const ObTrajectory tr = run_ob(ob_config(c));
  const fs::path dir = scratch("traj");
  write_ob_trajectory((dir / "ob").string(), tr, c);
  const FieldTrajectory back = read_trajectory((dir / "ob").string());
  REQUIRE(back.size() == tr.samples.size());
  for (std::size_t s = 0; s < back.size(); ++s) {
    CHECK(back[s].t == tr.samples[s].t);
    CHECK(back[s].u.comp[0] == tr.samples[s].state.U.comp[0]);
    CHECK(back[s].theta.values == tr.samples[s].state.Theta.values);
  }

  const CompareReport r = compare(back, back, c);
  CHECK(r.gronwall.pass);
  CHECK(r.gronwall.margin > 0.0);
  const json j = compare_json(r);
  CHECK(j.at("certificate").get<bool>());
  for (const json& s : j.at("samples"))
    for (const char* k : {"t", "E", "c", "bound", "residual"}) CHECK(s.contains(k));
  CHECK(j.contains("margin"));
  CHECK(j.contains("slack"));

  CHECK_THROWS_AS(read_trajectory((dir / "missing").string()), ConfigError);
}

TEST_CASE("nsf trajectory dump carries theta1 and diagnostics") {
  LabConfig c = parse_config(json{{"scaling", {{"alpha", 2.0}}},
                                  {"grid", {{"cells", 32}}},
                                  {"time", {{"final_time", 0.01}, {"sample_interval", 0.005}}}});
  const PerforatedGeometry geom = lab_geometry(c, c.scaling.epsilon);
  const NsfTrajectory tr = run_nsf(nsf_config(c), geom);
  const fs::path dir = scratch("nsf");
  write_nsf_trajectory(dir.string(), tr, c, geom);
  const json m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m.at("kind") == "nsf");
  CHECK(m.at("samples").size() == tr.samples.size());
  CHECK(m.at("samples")[0].at("files").contains("theta1"));
  CHECK(m.at("samples")[0].at("diagnostics").contains("entropy_production"));
  CHECK(read_trajectory(dir.string()).size() == tr.samples.size());
}

TEST_CASE("command line exit codes") {
  CHECK(run_cli({"estimates", "--m", "4", "--alpha", "3.5"}) == 0);
  CHECK(run_cli({"simulate-nsf", "--config", "/nonexistent.json", "--out", "x"}) == 2);
  CHECK(run_cli({"estimates", "--bogus-flag"}) == 2);
  CHECK(run_cli({}) == 2);
  const fs::path dir = scratch("cli");
  CHECK(run_cli({"sweep", "--epsilons", "0.5,0.4", "--out", (dir / "s").string()}) == 3);
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"grid\": {\"cells\": 32,}}";
  }
  CHECK(run_cli({"geometry", "--config", (dir / "bad.json").string()}) == 2);
  {
    std::ofstream geo(dir / "geo.json");
    geo << "{\"scaling\": {\"alpha\": 1.2}}";
  }
  // Guard balls do not fit: a geometry error is a configuration problem.
  CHECK(run_cli({"geometry", "--config", (dir / "geo.json").string()}) == 2);
}
