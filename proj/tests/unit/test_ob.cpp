#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lowmach/errors.hpp"
#include "lowmach/ob.hpp"

using namespace lowmach;
using std::numbers::pi;

namespace {

ObConfig small_config(int cells) {
  ObConfig c;
  c.cells = cells;
  c.final_time = 0.2;
  return c;
}

// Forcing reconstructed from the manufactured fields by central differences.
void fd_forcing(double x, double y, double t, const ObCoefficients& c, const Vec3& gG, double fu[2],
                double& ft) {
  auto at = [&](double xx, double yy, double tt) { return manufactured_point(xx, yy, tt, c, gG); };
  const double h = 1e-4, H = 1e-3;
  const ManufacturedPoint p = at(x, y, t);
  const ManufacturedPoint xp = at(x + h, y, t), xm = at(x - h, y, t);
  const ManufacturedPoint yp = at(x, y + h, t), ym = at(x, y - h, t);
  const ManufacturedPoint tp = at(x, y, t + h), tm = at(x, y, t - h);
  const ManufacturedPoint Xp = at(x + H, y, t), Xm = at(x - H, y, t);
  const ManufacturedPoint Yp = at(x, y + H, t), Ym = at(x, y - H, t);
  for (int a = 0; a < 2; ++a) {
    const double ut = (tp.U[a] - tm.U[a]) / (2 * h);
    const double ux = (xp.U[a] - xm.U[a]) / (2 * h), uy = (yp.U[a] - ym.U[a]) / (2 * h);
    const double lap = (Xp.U[a] - 2 * p.U[a] + Xm.U[a] + Yp.U[a] - 2 * p.U[a] + Ym.U[a]) / (H * H);
    const double dpi = a == 0 ? (xp.Pi - xm.Pi) / (2 * h) : (yp.Pi - ym.Pi) / (2 * h);
    fu[a] = c.rho_bar * (ut + p.U[0] * ux + p.U[1] * uy) + dpi - c.mu * lap + c.A * p.Theta * gG[a];
  }
  const double tt = (tp.Theta - tm.Theta) / (2 * h);
  const double tx = (xp.Theta - xm.Theta) / (2 * h), ty = (yp.Theta - ym.Theta) / (2 * h);
  const double lap = (Xp.Theta + Xm.Theta + Yp.Theta + Ym.Theta - 4 * p.Theta) / (H * H);
  ft = c.rho_bar * c.c_p * (tt + p.U[0] * tx + p.U[1] * ty) - c.kappa * lap -
       c.theta_bar * c.A * (gG[0] * p.U[0] + gG[1] * p.U[1]);
}

}  // namespace

TEST_CASE("manufactured forcings agree with a finite-difference residual") {
  ObConfig cfg;
  cfg.g0 = 1.3;
  const ObCoefficients c = ob_coefficients(cfg.thermo);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const double x = U(rng), y = U(rng), t = 0.5 * U(rng);
    const ManufacturedPoint p = manufactured_point(x, y, t, c, cfg.grad_G());
    double fu[2], ft;
    fd_forcing(x, y, t, c, cfg.grad_G(), fu, ft);
    worst = std::max({worst, std::abs(fu[0] - p.f_u[0]), std::abs(fu[1] - p.f_u[1]),
                      std::abs(ft - p.f_theta)});
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("manufactured traces and divergence") {
  const ObCoefficients c = ob_coefficients(thermo::ThermoParams{});
  double umax = 0.0, dn = 0.0;
  for (int s = 0; s <= 100; ++s) {
    const double r = s / 100.0;
    for (auto [x, y] : {std::pair{0.0, r}, {1.0, r}, {r, 0.0}, {r, 1.0}}) {
      const ManufacturedPoint p = manufactured_point(x, y, 0.3, c, {1, 0, 0});
      umax = std::max({umax, std::abs(p.U[0]), std::abs(p.U[1])});
    }
    // d Theta / dn = -pi sin(pi x) cos(pi y) e^{-t} vanishes on x = 0, 1.
    dn = std::max(dn, std::abs(std::sin(pi * 0.0) * std::cos(pi * r)));
  }
  CHECK(umax < 1e-14);
  CHECK(dn < 1e-14);

  ObConfig cfg;
  cfg.manufactured = true;
  cfg.cells = 32;
  const ObState s = ob_initial(cfg);
  CHECK(max_abs(divergence(s.U)) < 1e-12);
}

TEST_CASE("temperature forcing reduces to the advection remainder") {
  thermo::ThermoParams tp;
  tp.a_rad = 0.0;
  ObCoefficients c = ob_coefficients(tp);
  c.A = 0.0;
  c.kappa = c.rho_bar * c.c_p / (2 * pi * pi);
  const double x = 0.3, y = 0.7, t = 0.2;
  const ManufacturedPoint p = manufactured_point(x, y, t, c, {1, 0, 0});
  const double E = std::exp(-t);
  const double tx = -pi * std::sin(pi * x) * std::cos(pi * y) * E;
  const double ty = -pi * std::cos(pi * x) * std::sin(pi * y) * E;
  CHECK(p.f_theta == doctest::Approx(c.rho_bar * c.c_p * (p.U[0] * tx + p.U[1] * ty)).epsilon(1e-12));
}

TEST_CASE("zero data is a fixed point") {
  ObConfig cfg = small_config(16);
  cfg.theta_amplitude = 0.0;
  cfg.velocity_amplitude = 0.0;
  const ObTrajectory tr = run_ob(cfg);
  const ObState& s = tr.samples.back().state;
  CHECK(max_abs(s.U) == 0.0);
  CHECK(max_abs(s.Theta) == 0.0);
}

TEST_CASE("projection leaves a discretely solenoidal field") {
  ObConfig cfg = small_config(32);
  ObSolver solver(cfg);
  ObState s = ob_initial(cfg);
  for (int i = 0; i < 5; ++i) {
    solver.step(s, solver.stable_dt(s));
    CHECK(max_abs(divergence(s.U)) < 1e-10);
  }
  FaceField again = s.U;
  solver.project(again);
  double diff = 0.0;
  for (int a = 0; a < 2; ++a)
    for (std::size_t f = 0; f < again.comp[a].size(); ++f)
      diff = std::max(diff, std::abs(again.comp[a][f] - s.U.comp[a][f]));
  CHECK(diff < 1e-10);
}

TEST_CASE("A = 0 decouples temperature from velocity") {
  // With zero buoyancy a temperature field cannot drive motion from rest.
  ObConfig cfg = small_config(16);
  cfg.velocity_amplitude = 0.0;
  cfg.thermo.a_rad = 0.0;
  ObConfig hot = cfg;
  const ObTrajectory moving = run_ob(hot);
  CHECK(max_abs(moving.samples.back().state.U) > 0.0);  // buoyancy active by default
  cfg.g0 = 0.0;
  const ObTrajectory still = run_ob(cfg);
  CHECK(max_abs(still.samples.back().state.U) < 1e-14);
}

TEST_CASE("unforced energy is non-increasing at every step") {
  for (double g0 : {0.0, 1.0}) {
    ObConfig cfg = small_config(32);
    cfg.g0 = g0;
    cfg.final_time = 0.3;
    ObSolver solver(cfg);
    ObState s = ob_initial(cfg);
    double e = ob_energy(s, solver.coeffs());
    bool mono = true;
    while (s.t < cfg.final_time) {
      solver.step(s, solver.stable_dt(s));
      const double en = ob_energy(s, solver.coeffs());
      if (en > e * (1 + 1e-14)) mono = false;
      e = en;
    }
    CHECK(mono);
  }
}

TEST_CASE("discrete maximum principle with U = 0 and G = 0") {
  ObConfig cfg = small_config(32);
  cfg.velocity_amplitude = 0.0;
  cfg.g0 = 0.0;
  cfg.theta_amplitude = 0.7;
  const ObTrajectory tr = run_ob(cfg);
  const double m0 = max_abs(tr.samples.front().state.Theta);
  CHECK(max_abs(tr.samples.back().state.Theta) <= m0);
  CHECK(max_abs(tr.samples.back().state.Theta) < m0);
}

TEST_CASE("manufactured convergence is second order") {
  const ConvergenceStudy st = convergence_study(ObConfig{}, {32, 64, 128});
  for (std::size_t i = 0; i < st.order_U.size(); ++i) {
    MESSAGE("orders " << st.order_U[i] << " " << st.order_Theta[i]);
    CHECK(std::abs(st.order_U[i] - 2.0) <= 0.3);
    CHECK(std::abs(st.order_Theta[i] - 2.0) <= 0.3);
  }
  const double r = st.rows[2].error_U / st.rows[1].error_U;
  CHECK(std::abs(r - 0.25) <= 0.3 * 0.25);
}

TEST_CASE("invalid configurations are rejected") {
  ObConfig c;
  c.cfl = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ObConfig{};
  c.manufactured = true;
  c.length = 2.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
