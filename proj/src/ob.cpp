#include "lowmach/ob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lowmach/errors.hpp"
#include "lowmach/mac.hpp"
#include "lowmach/operators.hpp"
#include "lowmach/poisson.hpp"

namespace lowmach {

using std::numbers::pi;

ObCoefficients ob_coefficients(const thermo::ThermoParams& p) {
  const thermo::LinearizationCoeffs lin = thermo::linearization(p);
  const thermo::Transport tr = thermo::transport(p.theta_bar, p);
  return {p.rho_bar, p.theta_bar, lin.A, lin.c_p, tr.mu, tr.kappa};
}

void ObConfig::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError("ob: dim must be 2 or 3");
  if (cells < 4) throw ConfigError("ob: need at least 4 cells per side");
  if (!(length > 0.0)) throw ConfigError("ob: length must be positive");
  if (!(final_time > 0.0)) throw ConfigError("ob: final_time must be positive");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("ob: cfl must lie in (0, 1)");
  if (!(diffusion_safety > 0.0 && diffusion_safety <= 1.0))
    throw ConfigError("ob: diffusion_safety must lie in (0, 1]");
  if (!(sample_interval >= 0.0)) throw ConfigError("ob: sample_interval must be >= 0");
  if (manufactured && (dim != 2 || length != 1.0))
    throw ConfigError("ob: the manufactured solution is defined on the unit square");
  thermo.validate();
}

Grid ObConfig::grid() const { return Grid::uniform(dim, cells, length); }

Vec3 ObConfig::grad_G() const { return {g0 / length, 0.0, 0.0}; }

namespace {

// Manufactured forcing split by powers of E = e^{-t}: f = f0 + E f1 + E^2 f2.
struct Terms {
  double U[2];        // times E
  double Theta;       // times E
  double Pi;
  double fu[3][2];    // [power][component]
  double ft[3];
};

Terms terms(double x, double y, const ObCoefficients& c, const Vec3& gG) {
  const double sx = std::sin(pi * x), cx = std::cos(pi * x);
  const double sy = std::sin(pi * y), cy = std::cos(pi * y);
  const double s2x = std::sin(2 * pi * x), c2x = std::cos(2 * pi * x);
  const double s2y = std::sin(2 * pi * y), c2y = std::cos(2 * pi * y);
  const double p2 = pi * pi, p3 = p2 * pi;
  Terms t{};
  const double u1 = pi * sx * sx * s2y, u2 = -pi * s2x * sy * sy;
  const double u1x = p2 * s2x * s2y, u1y = 2 * p2 * sx * sx * c2y;
  const double u2x = -2 * p2 * c2x * sy * sy, u2y = -p2 * s2x * s2y;
  const double lap1 = 2 * p3 * c2x * s2y - 4 * p3 * sx * sx * s2y;
  const double lap2 = 4 * p3 * s2x * sy * sy - 2 * p3 * s2x * c2y;
  const double th = cx * cy, thx = -pi * sx * cy, thy = -pi * cx * sy;
  t.U[0] = u1;
  t.U[1] = u2;
  t.Theta = th;
  t.Pi = c2x * c2y;
  t.fu[0][0] = -2 * pi * s2x * c2y;
  t.fu[0][1] = -2 * pi * c2x * s2y;
  t.fu[1][0] = -c.rho_bar * u1 - c.mu * lap1 + c.A * th * gG[0];
  t.fu[1][1] = -c.rho_bar * u2 - c.mu * lap2 + c.A * th * gG[1];
  t.fu[2][0] = c.rho_bar * (u1 * u1x + u2 * u1y);
  t.fu[2][1] = c.rho_bar * (u1 * u2x + u2 * u2y);
  const double rc = c.rho_bar * c.c_p;
  t.ft[0] = 0.0;
  t.ft[1] = -rc * th + c.kappa * 2 * p2 * th - c.theta_bar * c.A * (gG[0] * u1 + gG[1] * u2);
  t.ft[2] = rc * (u1 * thx + u2 * thy);
  return t;
}

}  // namespace

ManufacturedPoint manufactured_point(double x, double y, double t, const ObCoefficients& c,
                                     const Vec3& gG) {
  const Terms tm = terms(x, y, c, gG);
  const double E = std::exp(-t);
  ManufacturedPoint p;
  for (int a = 0; a < 2; ++a) {
    p.U[a] = E * tm.U[a];
    p.f_u[a] = tm.fu[0][a] + E * tm.fu[1][a] + E * E * tm.fu[2][a];
  }
  p.Theta = E * tm.Theta;
  p.Pi = tm.Pi;
  p.f_theta = tm.ft[0] + E * tm.ft[1] + E * E * tm.ft[2];
  return p;
}

double manufactured_stream(double x, double y, double t) {
  const double sx = std::sin(pi * x), sy = std::sin(pi * y);
  return sx * sx * sy * sy * std::exp(-t);
}

ManufacturedFields manufactured_solution(double t, const Grid& g, const ObCoefficients& c,
                                         const Vec3& gG) {
  if (g.dim != 2) throw UnsupportedInputError("manufactured solution is two-dimensional");
  ManufacturedFields m{FaceField(g), CellField(g), CellField(g), FaceField(g), CellField(g)};
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      const Vec3 x = g.cell_center(i, j, 0);
      const ManufacturedPoint p = manufactured_point(x[0], x[1], t, c, gG);
      m.Theta(i, j) = p.Theta;
      m.Pi(i, j) = p.Pi;
      m.f_theta(i, j) = p.f_theta;
    }
  for (int a = 0; a < 2; ++a) {
    const Index3 d = g.face_dims(a);
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        const Vec3 x = g.face_center(a, i, j, 0);
        const ManufacturedPoint p = manufactured_point(x[0], x[1], t, c, gG);
        m.U.at(a, i, j) = p.U[a];
        m.f_u.at(a, i, j) = p.f_u[a];
      }
  }
  mac::zero_walls(m.U);
  return m;
}

double ob_initial_stream(double x, double y, const ObConfig& cfg) {
  const double L = cfg.length;
  const double sx = std::sin(pi * x / L), sy = std::sin(pi * y / L);
  return cfg.velocity_amplitude * L / pi * sx * sx * sy * sy;
}

ObState ob_initial(const ObConfig& cfg) {
  cfg.validate();
  const Grid g = cfg.grid();
  ObState s{FaceField(g), CellField(g), CellField(g), 0.0, 0};
  if (cfg.manufactured) {
    const NodeField psi = sample_nodes(g, [](double x, double y) { return manufactured_stream(x, y, 0.0); });
    s.U = perp_gradient(psi);
    const ManufacturedFields m = manufactured_solution(0.0, g, ob_coefficients(cfg.thermo), cfg.grad_G());
    s.Theta = m.Theta;
    s.Pi = m.Pi;
    return s;
  }
  if (g.dim == 2) {
    const NodeField psi = sample_nodes(g, [&](double x, double y) { return ob_initial_stream(x, y, cfg); });
    s.U = perp_gradient(psi);
  }
  const double L = cfg.length;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.cell_center(i, j, k);
        s.Theta(i, j, k) = cfg.theta_amplitude * std::cos(pi * x[0] / L) * std::cos(pi * x[1] / L);
      }
  return s;
}

double ob_energy(const ObState& s, const ObCoefficients& c) {
  const double u2 = l2_norm(s.U);
  const double t2 = l2_norm(s.Theta);
  return 0.5 * c.rho_bar * u2 * u2 + 0.5 * c.rho_bar * c.c_p / c.theta_bar * t2 * t2;
}

// ---------------------------------------------------------------------------

struct ObSolver::Impl {
  Grid grid;
  NeumannPoisson poisson;
  CellField mu_field;
  CellField zero;
  // Manufactured forcing by powers of e^{-t}.
  bool forced = false;
  FaceField fu[3];
  CellField ft[3];
  explicit Impl(const Grid& g) : grid(g), poisson(g) {}
};

ObSolver::ObSolver(const ObConfig& config)
    : config_(config), coeffs_(ob_coefficients(config.thermo)), impl_(nullptr) {
  config_.validate();
  const Grid g = config_.grid();
  impl_ = new Impl(g);
  impl_->mu_field = CellField(g, coeffs_.mu);
  impl_->zero = CellField(g, 0.0);
  if (config_.manufactured) {
    impl_->forced = true;
    const Vec3 gG = config_.grad_G();
    for (int p = 0; p < 3; ++p) {
      impl_->fu[p] = FaceField(g);
      impl_->ft[p] = CellField(g);
    }
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Vec3 x = g.cell_center(i, j, 0);
        const Terms tm = terms(x[0], x[1], coeffs_, gG);
        for (int p = 0; p < 3; ++p) impl_->ft[p](i, j) = tm.ft[p];
      }
    for (int a = 0; a < 2; ++a) {
      const Index3 d = g.face_dims(a);
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          const Vec3 x = g.face_center(a, i, j, 0);
          const Terms tm = terms(x[0], x[1], coeffs_, gG);
          for (int p = 0; p < 3; ++p) impl_->fu[p].at(a, i, j) = tm.fu[p][a];
        }
    }
  }
}

ObSolver::~ObSolver() { delete impl_; }

double ObSolver::stable_dt(const ObState& s) const {
  const double h = impl_->grid.h;
  const double nu = coeffs_.mu / coeffs_.rho_bar;
  const double chi = coeffs_.kappa / (coeffs_.rho_bar * coeffs_.c_p);
  double dt = config_.diffusion_safety * h * h / (2.0 * impl_->grid.dim * std::max(nu, chi));
  const double umax = mac::max_cell_speed(s.U);
  if (umax > 0.0) dt = std::min(dt, config_.cfl * h / umax);
  return dt;
}

CellField ObSolver::project(FaceField& U) {
  CellField phi;
  impl_->poisson.solve(divergence(U), phi, config_.poisson_tol, 100);
  FaceField gp;
  mac::cell_gradient(phi, gp);
  for (int a = 0; a < U.grid.dim; ++a)
    for (std::size_t f = 0; f < U.comp[a].size(); ++f) U.comp[a][f] -= gp.comp[a][f];
  mac::zero_walls(U);
  return phi;
}

void ObSolver::tendency(const ObState& s, FaceField& du, CellField& dth) {
  const Grid& g = impl_->grid;
  const int dim = g.dim;
  const ObCoefficients& c = coeffs_;
  const Vec3 gG = config_.grad_G();
  const double ih = 1.0 / g.h;

  FaceField adv, visc;
  mac::advect_velocity(s.U, 0.0, adv);
  mac::stress_divergence(s.U, impl_->mu_field, impl_->zero, visc);
  du = FaceField(g);
  for (int a = 0; a < dim; ++a) {
    const Index3 d = g.face_dims(a);
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          const Index3 p{i, j, k};
          if (p[a] == 0 || p[a] == g.n[a]) continue;
          Index3 lo = p;
          lo[a] -= 1;
          const double th_f = 0.5 * (s.Theta(i, j, k) + s.Theta(lo[0], lo[1], lo[2]));
          const std::size_t f = g.face_index(a, i, j, k);
          du.comp[a][f] = -adv.comp[a][f] + (visc.comp[a][f] - c.A * th_f * gG[a]) / c.rho_bar;
        }
  }

  // Temperature: central flux-form advection, Neumann diffusion, exchange term.
  const double rc = c.rho_bar * c.c_p;
  std::vector<double> lap;
  impl_->poisson.apply(s.Theta.values, lap);
  dth = CellField(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Index3 p{i, j, k};
        double flux = 0.0, src = 0.0;
        for (int a = 0; a < dim; ++a) {
          Index3 hi = p;
          hi[a] += 1;
          const double u_lo = s.U.at(a, i, j, k), u_hi = s.U.at(a, hi[0], hi[1], hi[2]);
          const double t0 = s.Theta(i, j, k);
          double f_hi = 0.0, f_lo = 0.0;
          if (p[a] < g.n[a] - 1) f_hi = u_hi * 0.5 * (t0 + s.Theta(hi[0], hi[1], hi[2]));
          if (p[a] > 0) {
            Index3 lo = p;
            lo[a] -= 1;
            f_lo = u_lo * 0.5 * (t0 + s.Theta(lo[0], lo[1], lo[2]));
          }
          flux += (f_hi - f_lo) * ih;
          src += gG[a] * 0.5 * (u_lo + u_hi);
        }
        const std::size_t cidx = g.index(i, j, k);
        dth.values[cidx] = -flux + (c.kappa * lap[cidx] + c.theta_bar * c.A * src) / rc;
      }

  if (impl_->forced) {
    const double E = std::exp(-s.t);
    const double w[3] = {1.0, E, E * E};
    for (int p = 0; p < 3; ++p) {
      for (int a = 0; a < dim; ++a)
        for (std::size_t f = 0; f < du.comp[a].size(); ++f)
          du.comp[a][f] += w[p] * impl_->fu[p].comp[a][f] / c.rho_bar;
      for (std::size_t q = 0; q < dth.values.size(); ++q) dth.values[q] += w[p] * impl_->ft[p].values[q] / rc;
    }
    mac::zero_walls(du);
  }
}

void ObSolver::euler(ObState& s, double dt) {
  FaceField du;
  CellField dth;
  tendency(s, du, dth);
  for (int a = 0; a < impl_->grid.dim; ++a)
    for (std::size_t f = 0; f < du.comp[a].size(); ++f) s.U.comp[a][f] += dt * du.comp[a][f];
  for (std::size_t q = 0; q < dth.values.size(); ++q) s.Theta.values[q] += dt * dth.values[q];
  CellField phi = project(s.U);
  for (std::size_t q = 0; q < phi.values.size(); ++q) s.Pi.values[q] = coeffs_.rho_bar * phi.values[q] / dt;
  s.t += dt;
}

void ObSolver::step(ObState& s, double dt) {
  if (!config_.rk2) {
    euler(s, dt);
  } else {
    // Heun: average of the start state and two chained Euler steps.
    ObState mid = s;
    euler(mid, dt);
    ObState end = mid;
    euler(end, dt);
    for (int a = 0; a < impl_->grid.dim; ++a)
      for (std::size_t f = 0; f < s.U.comp[a].size(); ++f)
        s.U.comp[a][f] = 0.5 * (s.U.comp[a][f] + end.U.comp[a][f]);
    for (std::size_t q = 0; q < s.Theta.values.size(); ++q) {
      s.Theta.values[q] = 0.5 * (s.Theta.values[q] + end.Theta.values[q]);
      s.Pi.values[q] = 0.5 * (mid.Pi.values[q] + end.Pi.values[q]);
    }
    s.t += dt;
  }
  ++s.step;
  if (!all_finite(s.U) || !all_finite(s.Theta))
    throw NumericalError("ob: non-finite values at t = " + std::to_string(s.t));
}

namespace {

double max_div(const FaceField& U) { return max_abs(divergence(U)); }

}  // namespace

ObTrajectory run_ob(const ObConfig& config) {
  ObSolver solver(config);
  ObTrajectory traj;
  traj.coeffs = solver.coeffs();
  ObState s = ob_initial(config);
  auto record = [&] {
    traj.samples.push_back({s.t, ob_energy(s, traj.coeffs), max_div(s.U), s});
  };
  record();
  const double T = config.final_time;
  const double every = config.sample_interval > 0.0 ? config.sample_interval : T;
  double next = std::min(every, T);
  while (s.t < T * (1.0 - 1e-14)) {
    double dt = solver.stable_dt(s);
    bool hit = false;
    if (s.t + dt >= next * (1.0 - 1e-12)) {
      dt = next - s.t;
      hit = true;
    }
    solver.step(s, dt);
    if (hit) {
      s.t = next;
      record();
      next = std::min(next + every, T);
    }
  }
  traj.steps = s.step;
  if (config.manufactured) {
    const ManufacturedFields m = manufactured_solution(s.t, s.U.grid, traj.coeffs, config.grad_G());
    FaceField dU = s.U;
    for (int a = 0; a < 2; ++a)
      for (std::size_t f = 0; f < dU.comp[a].size(); ++f) dU.comp[a][f] -= m.U.comp[a][f];
    CellField dT = s.Theta;
    for (std::size_t q = 0; q < dT.values.size(); ++q) dT.values[q] -= m.Theta.values[q];
    traj.error_U = l2_norm(dU);
    traj.error_Theta = l2_norm(dT);
  }
  return traj;
}

ConvergenceStudy convergence_study(ObConfig config, const std::vector<int>& resolutions) {
  if (resolutions.size() < 2) throw ConfigError("convergence study needs at least two resolutions");
  config.manufactured = true;
  config.sample_interval = 0.0;
  ConvergenceStudy st;
  for (int n : resolutions) {
    config.cells = n;
    const ObTrajectory tr = run_ob(config);
    st.rows.push_back({n, config.length / n, *tr.error_U, *tr.error_Theta, tr.steps});
  }
  for (std::size_t r = 1; r < st.rows.size(); ++r) {
    const double ratio = static_cast<double>(st.rows[r].cells) / st.rows[r - 1].cells;
    st.order_U.push_back(std::log(st.rows[r - 1].error_U / st.rows[r].error_U) / std::log(ratio));
    st.order_Theta.push_back(std::log(st.rows[r - 1].error_Theta / st.rows[r].error_Theta) /
                             std::log(ratio));
  }
  return st;
}

}  // namespace lowmach
