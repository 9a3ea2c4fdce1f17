#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lowmach/errors.hpp"
#include "lowmach/relenergy.hpp"

using namespace lowmach;
using std::numbers::pi;

namespace {

ObCoefficients unit_coeffs() {
  ObCoefficients c;
  c.rho_bar = 1.0;
  c.theta_bar = 1.0;
  c.c_p = 15.0 / 8.0;
  c.mu = 0.02;
  c.kappa = 0.02;
  return c;
}

FaceField random_faces(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  FaceField u(g);
  for (int a = 0; a < g.dim; ++a)
    for (double& v : u.comp[a]) v = N(rng);
  return u;
}

}  // namespace

TEST_CASE("relative energy closed-form values") {
  const Grid g = Grid::uniform(2, 16);
  const ObCoefficients c = unit_coeffs();
  FaceField u(g, 0.0), U(g, 0.0);
  CellField th(g, 0.3), Th(g, 0.3);
  CHECK(relative_energy(u, th, U, Th, c) == 0.0);

  const double cc = 0.7;
  for (double& v : u.comp[0]) v = cc;
  CHECK(relative_energy(u, th, U, Th, c) == doctest::Approx(0.5 * cc * cc).epsilon(1e-14));
  CHECK(relative_energy(U, Th, u, th, c) == doctest::Approx(0.5 * cc * cc).epsilon(1e-14));

  CellField th1(g, 1.3);
  CHECK(relative_energy(U, th1, U, Th, c) == doctest::Approx(0.9375).epsilon(1e-14));

  const Grid other = Grid::uniform(2, 8);
  CHECK_THROWS_AS(relative_energy(FaceField(other), th, U, Th, c), ShapeError);
}

TEST_CASE("defect proxies vanish for constant fields") {
  const Grid g = Grid::uniform(2, 32);
  FaceField u(g, 0.4);
  const DefectProxies d = defect_proxies(u, 4 * g.h);
  double m = 0.0;
  for (const auto& t : d.R) m = std::max({m, std::abs(t[0][0]), std::abs(t[0][1]), std::abs(t[1][1])});
  CHECK(m < 1e-15);
  CHECK(max_abs(d.E) < 1e-15);
  CHECK_THROWS_AS(defect_proxies(u, 1.5 * g.h), ResolutionError);
}

TEST_CASE("defect energy of a fast oscillation is a quarter of rho_bar") {
  const int n = 256;
  const Grid g = Grid::uniform(2, n);
  const double d0 = 8 * g.h, rho_bar = 1.5;
  FaceField u(g);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= n; ++i) u.at(0, i, j) = std::sin(2 * pi * (i * g.h) / d0);
  const DefectProxies d = defect_proxies(u, 64 * g.h, rho_bar);
  // Averaging faces to centres scales the amplitude by cos(pi h / d0).
  const double amp = std::cos(pi * g.h / d0);
  const double expect = rho_bar * amp * amp / 4.0;
  double worst = 0.0;
  for (int j = 40; j < n - 40; ++j)
    for (int i = 40; i < n - 40; ++i) worst = std::max(worst, std::abs(d.E(i, j) - expect) / expect);
  CHECK(worst < 0.02);
}

TEST_CASE("defect proxies are PSD with an exact trace identity on random fields") {
  std::mt19937_64 rng(2024);
  double floor = 0.0, gap = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Grid g = Grid::uniform(s % 10 == 0 ? 3 : 2, s % 10 == 0 ? 8 : 24);
    const DefectProxies d = defect_proxies(random_faces(g, rng), 4 * g.h);
    floor = std::min(floor, defect_min_eigenvalue(d));
    gap = std::max(gap, defect_trace_gap(d));
  }
  CHECK(floor >= -1e-12);
  CHECK(gap == 0.0);
}

TEST_CASE("Gronwall certificate examples") {
  const std::vector<double> t{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> c(t.size(), 0.8);
  const double slack = 1e-6;

  const GronwallReport zero = gronwall_certificate(t, std::vector<double>(t.size(), 0.0), c, slack);
  CHECK(zero.pass);
  CHECK(zero.margin == doctest::Approx(slack).epsilon(1e-12));

  std::vector<double> jump(t.size(), 0.0);
  jump[2] = jump[3] = jump[4] = 1.0;
  CHECK_FALSE(gronwall_certificate(t, jump, c, slack).pass);

  // E = E0 exp(c t) evaluated with the same trapezoidal integral of a constant rate.
  std::vector<double> ex;
  for (double tt : t) ex.push_back(0.01 * std::exp(0.8 * tt));
  const GronwallReport sat = gronwall_certificate(t, ex, c, slack);
  CHECK(sat.pass);
  CHECK(sat.margin == doctest::Approx(slack).epsilon(1e-6));

  // Monotone in slack.
  std::vector<double> noisy = ex;
  noisy[3] += 5e-7;
  const bool p1 = gronwall_certificate(t, noisy, c, 1e-7).pass;
  const bool p2 = gronwall_certificate(t, noisy, c, 1e-6).pass;
  CHECK((!p1 || p2));
  CHECK(p2);
  CHECK_THROWS_AS(gronwall_certificate({}, {}, {}, slack), AlignmentError);
}

TEST_CASE("identical trajectories give a residual within slack") {
  const Grid g = Grid::uniform(2, 32);
  ObConfig cfg;
  cfg.cells = 32;
  cfg.final_time = 0.1;
  cfg.sample_interval = 0.05;
  const ObTrajectory tr = run_ob(cfg);
  FieldTrajectory w;
  for (const ObSample& s : tr.samples) w.push_back({s.t, s.state.U, s.state.Theta});
  const double delta = 4 * g.h;
  const auto res = rei_residual(w, w, tr.coeffs, delta);
  double sup_u = 0.0;
  for (const auto& s : w) sup_u = std::max(sup_u, max_velocity_gradient(s.u));
  const double slack = slack_budget(cfg.poisson_tol, g.h, delta, tr.coeffs.rho_bar, cfg.final_time, sup_u, sup_u);
  for (const ReiSample& r : res) {
    CHECK(r.relative_energy == 0.0);
    CHECK(r.dissipation == 0.0);
    CHECK(r.residual <= slack);
  }

  FieldTrajectory shifted = w;
  shifted[1].t += 1e-3;
  CHECK_THROWS_AS(rei_residual(w, shifted, tr.coeffs, delta), AlignmentError);
}
