#include "lowmach/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lowmach/errors.hpp"
#include "lowmach/harness.hpp"

namespace lowmach {

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kNumerical = 3;

LabConfig config_or_default(const std::string& path) {
  return path.empty() ? parse_config(nlohmann::json::object()) : load_config(path);
}

int cmd_geometry(const std::string& config_path, double eps, const std::string& out_dir) {
  LabConfig c = config_or_default(config_path);
  if (eps > 0.0) c.scaling.epsilon = eps;
  const PerforatedGeometry geom = lab_geometry(c, c.scaling.epsilon);
  const Grid g = Grid::uniform(c.scaling.dim, c.cells, c.length);
  const HoleMeasure hm = hole_measure(geom, &g);
  nlohmann::json centers = nlohmann::json::array();
  for (const Vec3& x : geom.centers) {
    nlohmann::json p = nlohmann::json::array();
    for (int a = 0; a < c.scaling.dim; ++a) p.push_back(x[a]);
    centers.push_back(p);
  }
  const nlohmann::json j{{"epsilon", geom.scaling.epsilon},
                         {"alpha", geom.scaling.alpha},
                         {"dim", geom.scaling.dim},
                         {"length", geom.length},
                         {"placement", to_string(geom.placement)},
                         {"seed", geom.seed},
                         {"N_holes", geom.count()},
                         {"theoretical_count_bound", theoretical_count_bound(geom.scaling, geom.length)},
                         {"hole_radius", geom.hole_radius},
                         {"guard_radius", geom.guard_radius},
                         {"disjoint_radius", geom.disjoint_radius},
                         {"M_holes", hm.analytic},
                         {"M_holes_rasterized", hm.rasterized},
                         {"bound_ratio", hm.bound_ratio},
                         {"centers", centers}};
  std::cout << "N=" << geom.count() << " hole_radius=" << geom.hole_radius
            << " M_holes=" << hm.analytic << " rasterized=" << hm.rasterized << '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json((fs::path(out_dir) / "geometry.json").string(), j);
    write_mask((fs::path(out_dir) / "mask.raw").string(), g, classify_cells(geom, g));
  }
  return kOk;
}

int cmd_estimates(const std::string& config_path, double m, double alpha, const std::string& out_dir) {
  LabConfig c = config_or_default(config_path);
  if (!std::isnan(m)) c.estimates.m = m;
  if (!std::isnan(alpha)) c.estimates.alpha = alpha;
  const GammaExponents g = gamma_exponents(c.estimates.m, c.estimates.alpha);
  std::cout << "γ₁=" << g.gamma1 << ", γ₂=" << g.gamma2 << ", γ₃=" << g.gamma3
            << ", positivity " << (g.all_positive() ? "OK" : "FAILED") << '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_gamma_map_csv((fs::path(out_dir) / "gamma_map.csv").string(),
                        gamma_map(10, 2.0, 6.0, 2.0, 6.0));
    ResidualOptions opts;
    opts.cells_per_annulus = c.estimates.cells_per_annulus;
    opts.thermo = c.thermo;
    const ResidualSweep s =
        residual_sweep(c.estimates.epsilons, c.estimates.alpha, c.estimates.m, opts);
    write_residual_sweep_csv((fs::path(out_dir) / "residual_sweep.csv").string(), s);
    write_json((fs::path(out_dir) / "residual_sweep.json").string(),
               residual_sweep_json(s, c.estimates.m, c.estimates.alpha));
  }
  return kOk;
}

int cmd_simulate_nsf(const std::string& config_path, double eps, const std::string& out_dir) {
  LabConfig c = load_config(config_path);
  if (eps > 0.0) c.scaling.epsilon = eps;
  const PerforatedGeometry geom = lab_geometry(c, c.scaling.epsilon);
  NsfConfig nc = nsf_config(c);
  nc.failure_dump_dir = out_dir;
  fs::create_directories(out_dir);
  const NsfTrajectory tr = run_nsf(nc, geom);
  write_nsf_trajectory(out_dir, tr, c, geom);
  std::cout << "nsf: " << tr.steps << " steps, " << tr.samples.size() << " samples, N_holes="
            << geom.count() << ", max hole velocity " << tr.max_hole_velocity << '\n';
  return kOk;
}

int cmd_simulate_ob(const std::string& config_path, const std::string& out_dir) {
  const LabConfig c = load_config(config_path);
  const ObTrajectory tr = run_ob(ob_config(c));
  write_ob_trajectory(out_dir, tr, c);
  std::cout << "ob: " << tr.steps << " steps, " << tr.samples.size() << " samples\n";
  return kOk;
}

int cmd_compare(const std::string& weak, const std::string& strong, const std::string& config_path,
                const std::string& out_dir) {
  const LabConfig c = config_or_default(config_path);
  const CompareReport r = compare(read_trajectory(weak), read_trajectory(strong), c);
  const nlohmann::json j = compare_json(r);
  if (out_dir.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    fs::create_directories(out_dir);
    write_json((fs::path(out_dir) / "compare.json").string(), j);
    std::cout << "certificate " << (r.gronwall.pass ? "PASS" : "FAIL") << ", margin "
              << r.gronwall.margin << ", slack " << r.gronwall.slack << '\n';
  }
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& eps, int workers,
              const std::string& out_dir) {
  LabConfig c = config_or_default(config_path);
  if (!eps.empty()) c.sweep_epsilons = eps;
  if (workers > 0) c.workers = workers;
  const ConvergenceReport r = sweep(c);
  fs::create_directories(out_dir);
  write_sweep_csv((fs::path(out_dir) / "sweep.csv").string(), r);
  write_json((fs::path(out_dir) / "sweep.json").string(), sweep_json(r));
  std::cout << "regime " << r.regime << " (theory flags " << (r.theory_flags ? "true" : "false")
            << ")\n";
  for (const MonotoneVerdict& v : r.verdicts) {
    std::cout << v.column << ": " << (v.strictly_decreasing ? "strictly decreasing" : "not monotone");
    if (v.fit) std::cout << ", exponent " << v.fit->exponent << " (r2 " << v.fit->r2 << ')';
    std::cout << '\n';
  }
  return kOk;
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Low Mach number limit lab: perforated-domain NSF runs against the OB limit"};
  app.require_subcommand(1);

  std::string config, out, weak, strong;
  double eps = -1.0;
  double m = std::nan(""), alpha = std::nan("");
  std::vector<double> eps_list;
  int workers = 0;

  auto* geo = app.add_subcommand("geometry", "Build a perforation and report counts and measures");
  geo->add_option("--config", config, "JSON configuration")->check(CLI::ExistingFile);
  geo->add_option("--epsilon", eps, "Override scaling.epsilon");
  geo->add_option("--out", out, "Output directory");

  auto* est = app.add_subcommand("estimates", "Gamma exponents, gamma map and residual sweep");
  est->add_option("--config", config, "JSON configuration")->check(CLI::ExistingFile);
  est->add_option("--m", m, "Mach exponent");
  est->add_option("--alpha", alpha, "Hole size exponent");
  est->add_option("--out", out, "Write gamma_map.csv and the residual sweep here");

  auto* nsf = app.add_subcommand("simulate-nsf", "Run the compressible solver");
  nsf->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
  nsf->add_option("--epsilon", eps, "Override scaling.epsilon");
  nsf->add_option("--out", out, "Trajectory directory")->required();

  auto* ob = app.add_subcommand("simulate-ob", "Run the Oberbeck-Boussinesq solver");
  ob->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
  ob->add_option("--out", out, "Trajectory directory")->required();

  auto* cmp = app.add_subcommand("compare", "Relative energy inequality and Gronwall certificate");
  cmp->add_option("--weak", weak, "Candidate trajectory directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--strong", strong, "Reference trajectory directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--config", config, "JSON configuration")->check(CLI::ExistingFile);
  cmp->add_option("--out", out, "Write compare.json here instead of stdout");

  auto* sw = app.add_subcommand("sweep", "Epsilon sweep of NSF runs against one OB reference");
  sw->add_option("--config", config, "JSON configuration")->check(CLI::ExistingFile);
  sw->add_option("--epsilons", eps_list, "Override sweep.epsilons")->delimiter(',');
  sw->add_option("--workers", workers, "Concurrent cases");
  sw->add_option("--out", out, "Report directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*geo) return cmd_geometry(config, eps, out);
    if (*est) return cmd_estimates(config, m, alpha, out);
    if (*nsf) return cmd_simulate_nsf(config, eps, out);
    if (*ob) return cmd_simulate_ob(config, out);
    if (*cmp) return cmd_compare(weak, strong, config, out);
    if (*sw) return cmd_sweep(config, eps_list, workers, out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  const int rc = dispatch(args);
  std::cout.flush();
  std::cerr.flush();
  return rc;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace lowmach
