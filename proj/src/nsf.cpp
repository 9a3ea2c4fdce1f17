#include "lowmach/nsf.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "lowmach/errors.hpp"
#include "lowmach/mac.hpp"
#include "lowmach/operators.hpp"

namespace lowmach {

using std::numbers::pi;

void NsfConfig::validate() const {
  scaling.validate();
  thermo.validate();
  if (cells < 4) throw ConfigError("nsf: need at least 4 cells per side");
  if (!(length > 0.0)) throw ConfigError("nsf: length must be positive");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("nsf: cfl must lie in (0, 1)");
  if (!(diffusion_safety > 0.0 && diffusion_safety <= 1.0))
    throw ConfigError("nsf: diffusion_safety must lie in (0, 1]");
  if (!(eta_pen > 0.0)) throw ConfigError("nsf: eta_pen must be positive");
  if (!(final_time > 0.0)) throw ConfigError("nsf: final_time must be positive");
  if (!(sample_interval >= 0.0)) throw ConfigError("nsf: sample_interval must be >= 0");
  if (!(theta_amplitude >= 0.0) || !(velocity_amplitude >= 0.0))
    throw ConfigError("nsf: amplitudes must be non-negative");
}

Grid NsfConfig::grid() const { return Grid::uniform(scaling.dim, cells, length); }

NsfSetup nsf_setup(const NsfConfig& cfg, const PerforatedGeometry& geom) {
  cfg.validate();
  NsfSetup s;
  s.grid = cfg.grid();
  const Grid& g = s.grid;
  s.mask = classify_cells(geom, g);
  s.G = CellField(g);
  double sum = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.cell_center(0, i);
        const std::size_t c = g.index(i, j, k);
        s.G.values[c] = cfg.g0 * (x - 0.5 * cfg.length) / cfg.length;
        if (s.mask[c] != kHole) {
          sum += s.G.values[c];
          ++count;
        }
      }
  const double mean = count ? sum / count : 0.0;
  for (double& v : s.G.values) v -= mean;

  for (int a = 0; a < g.dim; ++a) {
    const Index3 d = g.face_dims(a);
    s.hole_face[a].assign(g.faces(a), 0);
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          const Index3 p{i, j, k};
          bool hole = false;
          if (p[a] < g.n[a]) hole = hole || s.mask[g.index(i, j, k)] == kHole;
          if (p[a] > 0) {
            Index3 lo = p;
            lo[a] -= 1;
            hole = hole || s.mask[g.index(lo[0], lo[1], lo[2])] == kHole;
          }
          s.hole_face[a][g.face_index(a, i, j, k)] = hole;
        }
  }
  return s;
}

double nsf_initial_stream(double x, double y, const NsfConfig& cfg) {
  const double L = cfg.length;
  const double sx = std::sin(pi * x / L), sy = std::sin(pi * y / L);
  return cfg.velocity_amplitude * L / pi * sx * sx * sy * sy;
}

NsfState init_well_prepared(const NsfConfig& cfg, const PerforatedGeometry& geom,
                            const NsfSetup& setup) {
  const Grid& g = setup.grid;
  const thermo::ThermoParams& tp = cfg.thermo;
  const double ma = cfg.scaling.mach();
  const thermo::Partials d = thermo::partials(tp.rho_bar, tp.theta_bar, tp);

  CellField theta1(g);
  double sum = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.cell_center(i, j, k);
        const std::size_t c = g.index(i, j, k);
        theta1.values[c] = cfg.theta_amplitude * std::cos(pi * x[0] / cfg.length) *
                           std::cos(pi * x[1] / cfg.length);
        if (setup.mask[c] != kHole) {
          sum += theta1.values[c];
          ++count;
        }
      }
  const double mean = count ? sum / count : 0.0;

  NsfState s{CellField(g), FaceField(g), CellField(g), 0.0, 0};
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const double t1 = theta1.values[c] - mean;
    const double r1 = (tp.rho_bar * setup.G.values[c] - d.dp_dtheta * t1) / d.dp_drho;
    s.rho.values[c] = tp.rho_bar + ma * r1;
    s.theta.values[c] = tp.theta_bar + ma * t1;
  }

  if (g.dim == 2 && cfg.velocity_amplitude > 0.0) {
    const NodeField psi = sample_nodes(g, [&](double x, double y) { return nsf_initial_stream(x, y, cfg); });
    if (geom.count() == 0) {
      s.u = perp_gradient(psi);
    } else {
      // The restriction cutoff needs a few cells across its annulus; when the
      // geometry's own annulus is unresolved it is widened towards r_D.
      PerforatedGeometry wide = geom;
      const double need = geom.hole_radius + 5.0 * g.h;
      if (wide.guard_radius < need)
        wide.guard_radius = std::min(need, geom.hole_radius + 0.9 * (geom.disjoint_radius - geom.hole_radius));
      s.u = restrict_stream(psi, wide, [&](double x, double y) { return nsf_initial_stream(x, y, cfg); })
                .velocity;
    }
  }
  mac::zero_walls(s.u);
  return s;
}

double well_prepared_residual(const NsfState& s, const NsfConfig& cfg, const NsfSetup& setup) {
  const thermo::ThermoParams& tp = cfg.thermo;
  const double ma = cfg.scaling.mach();
  const thermo::Partials d = thermo::partials(tp.rho_bar, tp.theta_bar, tp);
  double r = 0.0;
  for (std::size_t c = 0; c < setup.grid.cells(); ++c) {
    if (setup.mask[c] == kHole) continue;
    const double r1 = (s.rho.values[c] - tp.rho_bar) / ma;
    const double t1 = (s.theta.values[c] - tp.theta_bar) / ma;
    r = std::max(r, std::abs(d.dp_drho * r1 + d.dp_dtheta * t1 - tp.rho_bar * setup.G.values[c]));
  }
  return r;
}

namespace {

inline double face_kappa(const NsfSetup& setup, const std::vector<double>& kappa, int a,
                         std::size_t face, std::size_t lo, std::size_t hi) {
  if (setup.hole_face[a][face]) return 0.0;
  return 0.5 * (kappa[lo] + kappa[hi]);
}

}  // namespace

NsfDiagnostics nsf_diagnostics(const NsfState& s, const NsfConfig& cfg, const NsfSetup& setup) {
  const Grid& g = setup.grid;
  const thermo::ThermoParams& tp = cfg.thermo;
  const double ma = cfg.scaling.mach(), ma2 = ma * ma;
  const double vol = g.cell_volume();
  NsfDiagnostics d;
  d.t = s.t;
  std::vector<double> kappa(g.cells());
  std::vector<thermo::Tensor> grads;
  mac::cell_velocity_gradients(s.u, grads);
  double mass = 0.0, energy = 0.0, prod = 0.0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t c = g.index(i, j, k);
        const double r = s.rho.values[c], th = s.theta.values[c];
        const thermo::Transport tr = thermo::transport(th, tp);
        kappa[c] = tr.kappa;
        double u2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          const int o[3] = {a == 0, a == 1, a == 2};
          const double v = 0.5 * (s.u.at(a, i, j, k) + s.u.at(a, i + o[0], j + o[1], k + o[2]));
          u2 += v * v;
        }
        mass += r;
        energy += 0.5 * ma2 * r * u2 + r * thermo::internal_energy(r, th, tp) - ma * r * setup.G.values[c];
        prod += ma2 * thermo::viscous_dissipation(tr.mu, tr.eta, grads[c], g.dim) / th;
      }
  // Conductive part kappa |grad theta|^2 / theta^2 on faces.
  for (int a = 0; a < g.dim; ++a) {
    const Index3 fd = g.face_dims(a);
    for (int k = 0; k < fd[2]; ++k)
      for (int j = 0; j < fd[1]; ++j)
        for (int i = 0; i < fd[0]; ++i) {
          const Index3 p{i, j, k};
          if (p[a] == 0 || p[a] == g.n[a]) continue;
          Index3 lo = p;
          lo[a] -= 1;
          const std::size_t ch = g.index(i, j, k), cl = g.index(lo[0], lo[1], lo[2]);
          const double kf = face_kappa(setup, kappa, a, g.face_index(a, i, j, k), cl, ch);
          const double dt = (s.theta.values[ch] - s.theta.values[cl]) / g.h;
          const double tf = 0.5 * (s.theta.values[ch] + s.theta.values[cl]);
          prod += kf * dt * dt / (tf * tf);
        }
  }
  d.mass = mass * vol;
  d.energy = energy * vol;
  d.entropy_production = prod * vol;
  d.residual_measure = ess_res_split(s.rho, s.theta, setup.mask, tp).measure_res;
  double hv = 0.0;
  for (int a = 0; a < g.dim; ++a)
    for (std::size_t f = 0; f < s.u.comp[a].size(); ++f)
      if (setup.hole_face[a][f]) hv = std::max(hv, std::abs(s.u.comp[a][f]));
  d.hole_velocity = hv;
  return d;
}

// ---------------------------------------------------------------------------

NsfSolver::NsfSolver(const NsfConfig& config, const NsfSetup& setup) : config_(config), setup_(setup) {
  config_.validate();
}

double NsfSolver::sound_speed_max(const NsfState& s) const {
  // Adiabatic sound speed c^2 = dp/drho + theta (dp/dtheta)^2 / (rho^2 de/dtheta).
  double cmax = 0.0;
  for (std::size_t c = 0; c < s.rho.values.size(); ++c) {
    const double r = s.rho.values[c], th = s.theta.values[c];
    const thermo::Partials d = thermo::partials(r, th, config_.thermo);
    cmax = std::max(cmax, d.dp_drho + th * d.dp_dtheta * d.dp_dtheta / (r * r * d.de_dtheta));
  }
  return std::sqrt(cmax);
}

double NsfSolver::stable_dt(const NsfState& s) const {
  const Grid& g = setup_.grid;
  const double ma = config_.scaling.mach();
  const double speed = mac::max_cell_speed(s.u) + sound_speed_max(s) / ma;
  double dt = config_.cfl * g.h / speed;
  double diff = 0.0;
  for (std::size_t c = 0; c < s.rho.values.size(); ++c) {
    const double r = s.rho.values[c], th = s.theta.values[c];
    const thermo::Transport tr = thermo::transport(th, config_.thermo);
    const double cv = thermo::partials(r, th, config_.thermo).de_dtheta;
    diff = std::max({diff, (4.0 / 3.0 * tr.mu + tr.eta) / r, tr.kappa / (r * cv)});
  }
  if (diff > 0.0) dt = std::min(dt, config_.diffusion_safety * g.h * g.h / (2.0 * g.dim * diff));
  return dt;
}

bool NsfSolver::try_step(const NsfState& in, NsfState& out, double dt) const {
  const Grid& g = setup_.grid;
  const int dim = g.dim;
  const thermo::ThermoParams& tp = config_.thermo;
  const double ma = config_.scaling.mach(), ma2 = ma * ma;
  const double ih = 1.0 / g.h;
  const std::size_t nc = g.cells();

  CellField p(g), mu(g), lam(g), e(g);
  std::vector<double> kappa(nc), eta(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const double r = in.rho.values[c], th = in.theta.values[c];
    const thermo::Transport tr = thermo::transport(th, tp);
    p.values[c] = thermo::pressure(r, th, tp);
    e.values[c] = thermo::internal_energy(r, th, tp);
    mu.values[c] = tr.mu;
    eta[c] = tr.eta;
    lam.values[c] = tr.eta - 2.0 / 3.0 * tr.mu;
    kappa[c] = tr.kappa;
  }

  // Momentum in velocity form with the old pressure.
  FaceField adv, visc, gp, gG;
  mac::advect_velocity(in.u, 1.0, adv);
  mac::stress_divergence(in.u, mu, lam, visc);
  mac::cell_gradient(p, gp);
  mac::cell_gradient(setup_.G, gG);
  out.u = in.u;
  const double damp = 1.0 / (1.0 + dt / config_.eta_pen);
  for (int a = 0; a < dim; ++a) {
    const Index3 fd = g.face_dims(a);
    for (int k = 0; k < fd[2]; ++k)
      for (int j = 0; j < fd[1]; ++j)
        for (int i = 0; i < fd[0]; ++i) {
          const Index3 q{i, j, k};
          if (q[a] == 0 || q[a] == g.n[a]) continue;
          Index3 lo = q;
          lo[a] -= 1;
          const double rf = 0.5 * (in.rho(i, j, k) + in.rho(lo[0], lo[1], lo[2]));
          const std::size_t f = g.face_index(a, i, j, k);
          double v = in.u.comp[a][f] +
                     dt * (-adv.comp[a][f] + visc.comp[a][f] / rf - gp.comp[a][f] / (ma2 * rf) +
                           gG.comp[a][f] / ma);
          if (setup_.hole_face[a][f]) v *= damp;
          out.u.comp[a][f] = v;
        }
  }

  // Upwind mass and energy fluxes with the new velocity; Fourier flux with
  // zero conductivity on hole faces.
  std::vector<double> dmass(nc, 0.0), denergy(nc, 0.0);
  for (int a = 0; a < dim; ++a) {
    const Index3 fd = g.face_dims(a);
    for (int k = 0; k < fd[2]; ++k)
      for (int j = 0; j < fd[1]; ++j)
        for (int i = 0; i < fd[0]; ++i) {
          const Index3 q{i, j, k};
          if (q[a] == 0 || q[a] == g.n[a]) continue;
          Index3 lo = q;
          lo[a] -= 1;
          const std::size_t ch = g.index(i, j, k), cl = g.index(lo[0], lo[1], lo[2]);
          const std::size_t f = g.face_index(a, i, j, k);
          const double v = out.u.comp[a][f];
          const std::size_t up = v >= 0.0 ? cl : ch;
          const double fm = v * in.rho.values[up];
          const double fe = fm * e.values[up] -
                            face_kappa(setup_, kappa, a, f, cl, ch) *
                                (in.theta.values[ch] - in.theta.values[cl]) * ih;
          dmass[cl] -= fm * ih;
          dmass[ch] += fm * ih;
          denergy[cl] -= fe * ih;
          denergy[ch] += fe * ih;
        }
  }

  std::vector<thermo::Tensor> grads;
  mac::cell_velocity_gradients(in.u, grads);
  out.rho = CellField(g);
  out.theta = CellField(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t c = g.index(i, j, k);
        const double r_new = in.rho.values[c] + dt * dmass[c];
        if (!(r_new > 0.0))
          throw NumericalError("nsf: density lost positivity at t = " + std::to_string(in.t));
        double div = 0.0;
        for (int a = 0; a < dim; ++a) {
          const int o[3] = {a == 0, a == 1, a == 2};
          div += out.u.at(a, i + o[0], j + o[1], k + o[2]) - out.u.at(a, i, j, k);
        }
        div *= ih;
        const double phi = thermo::viscous_dissipation(mu.values[c], eta[c], grads[c], dim);
        const double E = in.rho.values[c] * e.values[c] +
                         dt * (denergy[c] + ma2 * phi - p.values[c] * div);
        out.rho.values[c] = r_new;
        out.theta.values[c] = thermo::temperature_from_energy(r_new, E / r_new, tp, in.theta.values[c]);
      }
  out.t = in.t + dt;
  out.step = in.step + 1;

  if (!all_finite(out.u)) throw NumericalError("nsf: non-finite velocity at t = " + std::to_string(in.t));
  // Courant check on the new state; a violation rejects the step.
  const double speed = mac::max_cell_speed(out.u) + sound_speed_max(out) / ma;
  return dt * speed <= g.h;
}

double NsfSolver::step(NsfState& s, double dt) {
  NsfState next;
  for (int attempt = 0; attempt < 30; ++attempt) {
    if (try_step(s, next, dt)) {
      s = std::move(next);
      return dt;
    }
    ++rejections_;
    dt *= 0.5;
  }
  throw NumericalError("nsf: step rejected 30 times by the CFL check");
}

// ---------------------------------------------------------------------------

void dump_nsf_state(const std::string& dir, const std::string& prefix, const NsfState& s,
                    const CellMask& mask) {
  std::filesystem::create_directories(dir);
  const std::string base = dir + "/" + prefix;
  write_cell_field(base + "_rho.raw", s.rho);
  write_cell_field(base + "_theta.raw", s.theta);
  for (int a = 0; a < s.u.grid.dim; ++a)
    write_face_component(base + "_u" + std::to_string(a) + ".raw", s.u, a);
  write_mask(base + "_mask.raw", s.rho.grid, mask);
}

NsfTrajectory run_nsf(const NsfConfig& cfg, const PerforatedGeometry& geom) {
  const NsfSetup setup = nsf_setup(cfg, geom);
  NsfSolver solver(cfg, setup);
  NsfState s = init_well_prepared(cfg, geom, setup);
  NsfTrajectory tr;
  NsfDiagnostics d = nsf_diagnostics(s, cfg, setup);
  tr.min_entropy_production = d.entropy_production;
  tr.max_hole_velocity = d.hole_velocity;
  tr.max_residual_measure = d.residual_measure;
  tr.samples.push_back({d, s});

  const double T = cfg.final_time;
  const double every = cfg.sample_interval > 0.0 ? cfg.sample_interval : T;
  double next = std::min(every, T);
  while (s.t < T * (1.0 - 1e-14)) {
    double dt = solver.stable_dt(s);
    bool hit = false;
    if (s.t + dt >= next * (1.0 - 1e-12)) {
      dt = next - s.t;
      hit = true;
    }
    double taken;
    try {
      taken = solver.step(s, dt);
    } catch (const NumericalError&) {
      if (!cfg.failure_dump_dir.empty()) dump_nsf_state(cfg.failure_dump_dir, "failure", s, setup.mask);
      throw;
    }
    if (taken < dt) hit = false;
    d = nsf_diagnostics(s, cfg, setup);
    tr.min_entropy_production = std::min(tr.min_entropy_production, d.entropy_production);
    tr.max_hole_velocity = std::max(tr.max_hole_velocity, d.hole_velocity);
    tr.max_residual_measure = std::max(tr.max_residual_measure, d.residual_measure);
    if (hit) {
      s.t = next;
      d.t = next;
      tr.samples.push_back({d, s});
      next = std::min(next + every, T);
    }
  }
  tr.steps = s.step;
  tr.rejections = solver.rejections();
  return tr;
}

}  // namespace lowmach
