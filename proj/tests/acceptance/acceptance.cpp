// Acceptance suite: one PASS/FAIL line per criterion, each with its own
// wall-clock budget. Usage: acceptance [sweep-config] [output-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lowmach/errors.hpp"
#include "lowmach/estimates.hpp"
#include "lowmach/geometry.hpp"
#include "lowmach/harness.hpp"
#include "lowmach/nsf.hpp"
#include "lowmach/ob.hpp"
#include "lowmach/operators.hpp"
#include "lowmach/relenergy.hpp"
#include "lowmach/thermo.hpp"

using namespace lowmach;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  char timing[96];
  std::snprintf(timing, sizeof timing, "%.2f s of %.0f s", secs, budget_s);
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << timing
            << (in_time ? "" : ", over budget") << "]" << std::endl;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Fourth-order central difference, independent of the closed-form partials.
template <class F>
double d5(F&& f, double x) {
  const double h = 1e-3 * std::min(1.0, x);
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

Outcome thermo_suite() {
  bool ok = thermo::eval_P(0.0, 1.0, false).P == 0.0;
  double worst_id = 0.0;
  bool monotone = true;
  for (int i = 0; i <= 200; ++i) {
    const double Z = std::pow(10.0, -3.0 + 6.0 * i / 200.0);
    const auto pr = thermo::eval_P(Z);
    monotone = monotone && pr.dP > 0.0;
    worst_id = std::max(worst_id, std::abs((5.0 / 3.0 * pr.P - pr.dP * Z) / Z - 2.0 / 3.0));
  }
  thermo::ThermoParams p;
  p.a_rad = 0.05;
  double gibbs = 0.0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const double rho = 0.1 * std::pow(100.0, i / 31.0), th = 0.1 * std::pow(100.0, j / 31.0);
      const double de_t = d5([&](double t) { return thermo::internal_energy(rho, t, p); }, th);
      const double ds_t = d5([&](double t) { return thermo::entropy(rho, t, p); }, th);
      const double de_r = d5([&](double r) { return thermo::internal_energy(r, th, p); }, rho);
      const double ds_r = d5([&](double r) { return thermo::entropy(r, th, p); }, rho);
      const double pr = thermo::pressure(rho, th, p);
      gibbs = std::max(gibbs, std::abs(th * ds_t - de_t) / std::max(1.0, std::abs(de_t)));
      gibbs = std::max(gibbs, std::abs(th * ds_r - (de_r - pr / (rho * rho))) / std::max(1.0, std::abs(de_r)));
    }
  ok = ok && monotone && worst_id <= 1e-12 && gibbs < 1e-8;
  return {ok, "P(0)=0, P'>0, max |(5/3 P - P'Z)/Z - 2/3| = " + num(worst_id) +
                  ", max Gibbs residual = " + num(gibbs)};
}

Outcome linearization_values() {
  thermo::ThermoParams p;
  p.a_rad = 0.0;
  const auto c = thermo::linearization(p);
  const auto fd = thermo::linearization_fd(p);
  const double eA = std::abs(c.A - 0.375), ec = std::abs(c.c_p - 1.875);
  const double rA = std::abs(fd.A - c.A) / c.A, rc = std::abs(fd.c_p - c.c_p) / c.c_p;
  const bool ok = eA <= 1e-15 && ec <= 1e-15 && rA < 1e-7 && rc < 1e-7;
  return {ok, "A = " + num(c.A) + ", c_p = " + num(c.c_p) + ", finite-difference rel. err " +
                  num(std::max(rA, rc))};
}

Outcome gamma_calculator() {
  const GammaExponents g = gamma_exponents(4.0, 3.5);
  bool ok = std::abs(g.gamma1 - 0.0882353) < 1e-6 && std::abs(g.gamma2 - 3.75) < 1e-6 &&
            std::abs(g.gamma3 - 0.25) < 1e-6;
  int mismatches = 0;
  for (const GammaMapCell& c : gamma_map(10, 2.0, 6.0, 2.0, 6.0))
    if (c.gamma.all_positive() != (c.alpha > 3.0 && c.alpha < c.m)) ++mismatches;
  ok = ok && mismatches == 0;
  return {ok, "(4, 3.5) -> (" + num(g.gamma1) + ", " + num(g.gamma2) + ", " + num(g.gamma3) +
                  "), positivity mismatches on 10x10 grid: " + std::to_string(mismatches)};
}

Outcome cutoff_scaling() {
  const double alpha = 3.2;
  std::vector<std::pair<double, double>> s;
  for (int k = 1; k <= 4; ++k) {
    const double e = std::pow(2.0, -k);
    s.emplace_back(e, cutoff_norms_asymptotic({e, alpha, 4.0, 3}, 1.0, 2.0).norm_grad_g);
  }
  const double expected = 3.0 * (alpha - 1.0) / 2.0 - alpha;
  const ScalingFit f = scaling_fit(s);
  return {std::abs(f.exponent - expected) <= 0.1,
          "fitted exponent " + num(f.exponent) + " vs " + num(expected)};
}

Outcome operator_suite() {
  auto relaxed = [](double eps) { return build_perforation({eps, 2.0, 3.0, 2}, 1.0); };
  const auto geom = relaxed(0.3);

  Grid g = Grid::uniform(2, 512);
  auto f = [](double x, double y) { return std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y) / (2 * M_PI); };
  const FaceField r = restrict_stream(sample_nodes(g, f), geom, f).velocity;
  const double div = max_abs(divergence(r));
  const CellMask mask = classify_cells(geom, g);
  bool zero_on_holes = true;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i)
      if (mask[g.index(i, j)] == kHole)
        zero_on_holes = zero_on_holes && r.at(0, i, j) == 0.0 && r.at(0, i + 1, j) == 0.0 &&
                        r.at(1, i, j) == 0.0 && r.at(1, i, j + 1) == 0.0;

  Grid ge = Grid::uniform(2, 256);
  const CellMask me = classify_cells(geom, ge);
  double ext_err = 0.0;
  for (int which = 0; which < 2; ++which) {
    CellField exact(ge), cut(ge);
    for (int j = 0; j < ge.n[1]; ++j)
      for (int i = 0; i < ge.n[0]; ++i) {
        const Vec3 x = ge.cell_center(i, j, 0);
        exact(i, j) = which == 0 ? 7.0 : 3.0 * x[0] - 2.0 * x[1] + 0.5;
        cut(i, j) = me[ge.index(i, j)] == kHole ? -100.0 : exact(i, j);
      }
    const CellField e = extend(cut, me);
    for (std::size_t c = 0; c < e.values.size(); ++c)
      ext_err = std::max(ext_err, std::abs(e.values[c] - exact.values[c]));
  }

  CellField smooth(ge);
  for (int j = 0; j < ge.n[1]; ++j)
    for (int i = 0; i < ge.n[0]; ++i) {
      const Vec3 x = ge.cell_center(i, j, 0);
      smooth(i, j) = std::sin(M_PI * x[0]) * std::cos(2 * M_PI * x[1]) + x[0] * x[1];
    }
  double lo = INFINITY, hi = 0.0;
  for (double eps : {0.4, 0.3, 0.25, 0.2}) {
    const CellMask m = classify_cells(relaxed(eps), ge);
    CellField cut = smooth;
    for (std::size_t c = 0; c < m.size(); ++c)
      if (m[c] == kHole) cut.values[c] = 0.0;
    const double ratio = w12_norm(extend(cut, m)) / w12_norm(cut, fluid_region(m));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  const bool ok = div < 1e-12 && zero_on_holes && ext_err <= 1e-10 && hi / lo < 3.0;
  return {ok, "restriction max|div| = " + num(div) + (zero_on_holes ? ", zero on holes" : ", NONZERO on holes") +
                  ", extension error " + num(ext_err) + ", norm ratio max/min " + num(hi / lo)};
}

Outcome defect_identities() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> N(0.0, 1.0);
  double floor = 0.0, gap = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Grid g = Grid::uniform(s % 10 == 0 ? 3 : 2, s % 10 == 0 ? 8 : 24);
    FaceField u(g);
    for (int a = 0; a < g.dim; ++a)
      for (double& v : u.comp[a]) v = N(rng);
    const DefectProxies d = defect_proxies(u, 4 * g.h);
    floor = std::min(floor, defect_min_eigenvalue(d));
    gap = std::max(gap, defect_trace_gap(d));
  }
  return {floor >= -1e-12 && gap == 0.0,
          "min eigenvalue " + num(floor) + ", max |tr R - 2E| = " + num(gap) + " over 100 fields"};
}

Outcome ob_convergence() {
  const ConvergenceStudy st = convergence_study(ObConfig{}, {64, 128, 256});
  bool ok = true;
  std::string orders;
  for (std::size_t i = 0; i < st.order_U.size(); ++i) {
    ok = ok && std::abs(st.order_U[i] - 2.0) <= 0.3 && std::abs(st.order_Theta[i] - 2.0) <= 0.3;
    orders += " " + num(st.order_U[i]) + "/" + num(st.order_Theta[i]);
  }
  ObConfig cfg;
  cfg.cells = 64;
  cfg.g0 = 0.0;
  cfg.final_time = 0.5;
  ObSolver solver(cfg);
  ObState s = ob_initial(cfg);
  double e = ob_energy(s, solver.coeffs());
  bool mono = true;
  long steps = 0;
  while (s.t < cfg.final_time) {
    solver.step(s, std::min(solver.stable_dt(s), cfg.final_time - s.t));
    const double en = ob_energy(s, solver.coeffs());
    if (en > e * (1.0 + 1e-14)) mono = false;
    e = en;
    ++steps;
  }
  ok = ok && mono;
  return {ok, "orders U/Theta" + orders + "; G = 0 energy " + (mono ? "non-increasing" : "INCREASED") +
                  " over " + std::to_string(steps) + " steps"};
}

Outcome nsf_invariants() {
  NsfConfig c;
  c.cells = 128;
  c.scaling = {0.5, 2.0, 1.0, 2};
  c.final_time = 0.5;
  const PerforatedGeometry geom = build_perforation(c.scaling, c.length);
  const NsfSetup setup = nsf_setup(c, geom);
  NsfSolver solver(c, setup);
  NsfState s = init_well_prepared(c, geom, setup);
  const double m0 = nsf_diagnostics(s, c, setup).mass;
  double mass_dev = 0.0, min_prod = INFINITY, max_hole = 0.0;
  long steps = 0;
  while (s.t < c.final_time * (1.0 - 1e-14)) {
    solver.step(s, std::min(solver.stable_dt(s), c.final_time - s.t));
    const NsfDiagnostics d = nsf_diagnostics(s, c, setup);
    mass_dev = std::max(mass_dev, std::abs(d.mass - m0) / m0);
    min_prod = std::min(min_prod, d.entropy_production);
    max_hole = std::max(max_hole, d.hole_velocity);
    ++steps;
  }

  NsfConfig still = c;
  still.g0 = 0.0;
  still.theta_amplitude = 0.0;
  still.velocity_amplitude = 0.0;
  still.final_time = 0.05;
  const NsfTrajectory fx = run_nsf(still, geom);
  const NsfState& e = fx.samples.back().state;
  double drift = max_abs(e.u);
  for (std::size_t q = 0; q < e.rho.values.size(); ++q) {
    drift = std::max(drift, std::abs(e.rho.values[q] - c.thermo.rho_bar));
    drift = std::max(drift, std::abs(e.theta.values[q] - c.thermo.theta_bar));
  }
  const bool ok = mass_dev <= 1e-12 && min_prod >= -1e-14 && max_hole <= 1e-6 && drift < 1e-14;
  return {ok, std::to_string(steps) + " steps at 128^2: mass drift " + num(mass_dev) +
                  ", min entropy production " + num(min_prod) + ", max hole velocity " + num(max_hole) +
                  ", fixed-point drift " + num(drift)};
}

Outcome weak_strong() {
  // Identical data: the certificate must hold with a positive margin.
  LabConfig lab;
  lab.cells = 64;
  lab.final_time = 0.5;
  lab.sample_interval = 0.05;
  ObConfig oc = ob_config(lab);
  const ObTrajectory tr = run_ob(oc);
  FieldTrajectory w;
  for (const ObSample& s : tr.samples) w.push_back({s.t, s.state.U, s.state.Theta});
  const CompareReport self = compare(w, w, lab);
  double max_res = 0.0;
  for (const ReiSample& r : self.rei) max_res = std::max(max_res, r.residual);
  bool ok = self.gronwall.pass && self.gronwall.margin > 0.0 && max_res <= self.gronwall.slack;

  // Numerical run against the exact manufactured solution from identical
  // initial data: E(0) = 0 and E must stay inside the slack envelope.
  oc.manufactured = true;
  const ObTrajectory man = run_ob(oc);
  const Grid g = oc.grid();
  FieldTrajectory num_tr, exact_tr;
  for (const ObSample& s : man.samples) {
    num_tr.push_back({s.t, s.state.U, s.state.Theta});
    const NodeField psi = sample_nodes(g, [&](double x, double y) { return manufactured_stream(x, y, s.t); });
    const ManufacturedFields mf = manufactured_solution(s.t, g, man.coeffs, oc.grad_G());
    exact_tr.push_back({s.t, perp_gradient(psi), mf.Theta});
  }
  const CompareReport vs = compare(num_tr, exact_tr, lab);
  const double E0 = vs.gronwall.E.front();
  const double Emax = *std::max_element(vs.gronwall.E.begin(), vs.gronwall.E.end());
  ok = ok && E0 == 0.0 && vs.gronwall.pass && vs.gronwall.margin > 0.0;
  return {ok, "self-comparison margin " + num(self.gronwall.margin) + " (slack " + num(self.gronwall.slack) +
                  ", max residual " + num(max_res) + "); manufactured E(0) = " + num(E0) + ", max E " +
                  num(Emax) + " within bound, margin " + num(vs.gronwall.margin)};
}

Outcome end_to_end(const std::string& config_path, const std::string& out_dir) {
  const LabConfig lab = load_config(config_path);
  const ConvergenceReport rep = sweep(lab);
  fs::create_directories(out_dir);
  write_sweep_csv((fs::path(out_dir) / "sweep.csv").string(), rep);
  write_json((fs::path(out_dir) / "sweep.json").string(), sweep_json(rep));

  bool ok = rep.regime == "relaxed" && rep.rows.size() == 3;
  std::string detail;
  for (const MonotoneVerdict& v : rep.verdicts) {
    ok = ok && v.strictly_decreasing;
    detail += v.column + (v.strictly_decreasing ? " decreasing" : " NOT decreasing") + "; ";
  }
  double worst_raster = 0.0, m_res = 0.0;
  for (const SweepRow& r : rep.rows) {
    ok = ok && r.status == "ok";
    worst_raster = std::max(worst_raster, std::abs(r.m_holes_rasterized / r.m_holes - 1.0));
    m_res = std::max(m_res, std::abs(r.m_res_max));
  }
  ok = ok && m_res == 0.0 && worst_raster < 0.02;
  std::string gaps;
  for (const SweepRow& r : rep.rows)
    gaps += " eps=" + num(r.epsilon) + ":" + num(r.velocity_gap) + "/" + num(r.temperature_gap) + "/" +
            num(r.boussinesq_residual);
  detail += "max |M_res| = " + num(m_res) + ", worst rasterized hole measure error " + num(worst_raster) +
            "; gaps (velocity/temperature/Boussinesq)" + gaps;
  return {ok, detail};
}

Outcome estimates_track(const std::string& config_path, const std::string& out_dir) {
  const LabConfig lab = load_config(config_path);
  ResidualOptions opts;
  opts.cells_per_annulus = lab.estimates.cells_per_annulus;
  const ResidualSweep s = residual_sweep(lab.estimates.epsilons, lab.estimates.alpha, lab.estimates.m, opts);
  fs::create_directories(out_dir);
  write_residual_sweep_csv((fs::path(out_dir) / "residual_sweep.csv").string(), s);
  write_json((fs::path(out_dir) / "residual_sweep.json").string(),
             residual_sweep_json(s, lab.estimates.m, lab.estimates.alpha));
  write_gamma_map_csv((fs::path(out_dir) / "gamma_map.csv").string(), gamma_map(10, 2.0, 6.0, 2.0, 6.0));
  bool ok = lab.estimates.epsilons.size() == 4;
  double worst_exp = INFINITY, worst_r2 = INFINITY;
  for (const ScalingFit& f : s.fits) {
    // value ~ eps^exponent, so decay as eps -> 0 is a positive exponent
    ok = ok && f.exponent > 0.05 && f.r2 > 0.8;
    worst_exp = std::min(worst_exp, f.exponent);
    worst_r2 = std::min(worst_r2, f.r2);
  }
  return {ok, "smallest decay exponent " + num(worst_exp) + ", smallest r2 " + num(worst_r2) + " over 7 terms"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config = argc > 1 ? argv[1] : LOWMACH_SWEEP_CONFIG;
  const std::string out = argc > 2 ? argv[2] : "acceptance_out";

  criterion("thermo hypotheses", 1, thermo_suite);
  criterion("linearization at (1,1), a = 0", 1, linearization_values);
  criterion("gamma calculator", 1, gamma_calculator);
  criterion("cutoff scaling, d = 3, alpha = 3.2", 10, cutoff_scaling);
  criterion("operator suite, d = 2", 60, operator_suite);
  criterion("defect proxy identities", 5, defect_identities);
  criterion("OB manufactured convergence and energy", 300, ob_convergence);
  criterion("NSF invariants at 128^2", 120, nsf_invariants);
  criterion("weak-strong certificate", 300, weak_strong);
  criterion("end-to-end sweep at 256^2", 600, [&] { return end_to_end(config, out); });
  criterion("estimates track", 120, [&] { return estimates_track(config, out); });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
