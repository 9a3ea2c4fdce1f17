#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lowmach/errors.hpp"
#include "lowmach/estimates.hpp"

using namespace lowmach;

TEST_CASE("gamma exponents") {
  auto g = gamma_exponents(4.0, 3.5);
  CHECK(std::abs(g.gamma1 - 0.0882353) < 1e-6);
  CHECK(std::abs(g.gamma1 - 0.75 / 8.5) < 1e-15);
  CHECK(g.gamma2 == 3.75);
  CHECK(g.gamma3 == 0.25);
  CHECK(g.all_positive());

  auto b = gamma_exponents(4.0, 3.0);
  CHECK(b.gamma1 == 0.0);
  CHECK(b.gamma3 == 0.0);
  CHECK_FALSE(b.all_positive());
  auto c = gamma_exponents(3.5, 3.5);
  CHECK(c.gamma3 == 0.0);
  CHECK_FALSE(c.positive3);
  CHECK_THROWS_AS(gamma_exponents(4.0, 1.8), SingularityError);
  CHECK_THROWS_AS(gamma_exponents(-1.0, 3.5), ConfigError);
}

TEST_CASE("gamma positivity and monotonicity on a grid") {
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const double m = 2.05 + 0.5 * i;
      const double alpha = 2.05 + 0.45 * j;
      auto g = gamma_exponents(m, alpha);
      CHECK(g.all_positive() == (alpha > 3.0 && alpha < m));
      if (alpha < m) {
        auto up = gamma_exponents(m + 0.5, alpha);
        CHECK(up.gamma1 >= g.gamma1);
        CHECK(up.gamma2 >= g.gamma2);
        CHECK(up.gamma3 >= g.gamma3);
      }
    }
}

TEST_CASE("scaling fit") {
  std::vector<std::pair<double, double>> s;
  for (double e : {0.5, 0.25, 0.125, 0.0625}) s.emplace_back(e, e * e);
  auto f = scaling_fit(s);
  CHECK(std::abs(f.exponent - 2.0) < 1e-10);
  CHECK(f.r2 == doctest::Approx(1.0));

  s.clear();
  for (double e : {0.5, 0.4, 0.3}) s.emplace_back(e, 5.0 * std::pow(e, 0.25));
  CHECK(scaling_fit(s).exponent == doctest::Approx(0.25));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  s.clear();
  for (int k = 0; k < 8; ++k) {
    const double e = std::pow(2.0, -1 - 0.5 * k);
    s.emplace_back(e, e * (1.0 + 0.05 * noise(rng)));
  }
  CHECK(std::abs(scaling_fit(s).exponent - 1.0) < 0.1);

  auto zeros = scaling_fit({{0.5, 0.0}, {0.4, 0.0}, {0.3, 0.0}});
  CHECK(std::isinf(zeros.exponent));
  CHECK(zeros.r2 == 1.0);
  CHECK_THROWS_AS(scaling_fit({{0.5, 1.0}, {0.4, 2.0}}), FitError);
  CHECK_THROWS_AS(scaling_fit({{0.5, 1.0}, {0.5, 2.0}, {0.4, 3.0}}), FitError);
  CHECK_THROWS_AS(scaling_fit({{0.5, 1.0}, {0.4, 0.0}, {0.3, 0.0}}), FitError);
}

TEST_CASE("reference exponents") {
  auto r = reference_3d_exponents(4.0, 3.5);
  CHECK(r[0] == doctest::Approx(3.0));
  CHECK(r[4] == doctest::Approx(0.75 / 8.5));
  CHECK(r[6] == doctest::Approx(0.6));
  for (double v : r) CHECK(v > 0.0);
}

TEST_CASE("residual terms: trivial cases") {
  auto geom = build_perforation({0.35, 3.5, 4.0, 2}, 1.0);
  auto st = default_synthetic_state();
  auto base = momentum_residual_terms(st, geom);
  for (double v : base) CHECK(v > 0.0);

  auto still = st;
  still.u = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
  still.grad_u = [](double, double) { return std::array<double, 4>{0, 0, 0, 0}; };
  auto z = momentum_residual_terms(still, geom);
  for (int t = 0; t < 6; ++t) CHECK(z[t] == 0.0);
  CHECK(z[6] == base[6]);

  // Test function supported in a disc that avoids every guard ball.
  auto away = st;
  away.psi_test = [](double x, double y) {
    const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.9) * (y - 0.9);
    return r2 < 0.01 ? std::pow(0.01 - r2, 3) : 0.0;
  };
  for (const auto& c : geom.centers) CHECK(std::hypot(c[0] - 0.5, c[1] - 0.9) > 0.1 + geom.guard_radius);
  for (double v : momentum_residual_terms(away, geom)) CHECK(v == 0.0);

  auto doubled = st;
  doubled.psi_test = [f = st.psi_test](double x, double y) { return 2.0 * f(x, y); };
  auto d = momentum_residual_terms(doubled, geom);
  for (int t = 0; t < 7; ++t) CHECK(d[t] == doctest::Approx(2.0 * base[t]).epsilon(1e-12));
}

TEST_CASE("residual terms: refinement") {
  auto geom = build_perforation({0.35, 3.5, 4.0, 2}, 1.0);
  ResidualOptions fine;
  fine.cells_per_annulus = 32;
  auto a = momentum_residual_terms(default_synthetic_state(), geom);
  auto b = momentum_residual_terms(default_synthetic_state(), geom, fine);
  for (int t = 0; t < 7; ++t) CHECK(std::abs(b[t] - a[t]) < 0.05 * a[t]);
}

TEST_CASE("residual sweep decays") {
  auto sw = residual_sweep({0.5, 0.35, 0.25, 0.18}, 3.5, 4.0);
  for (int t = 0; t < 7; ++t) {
    CHECK(sw.fits[t].exponent > 0.05);
    CHECK(sw.fits[t].r2 > 0.8);
  }
}

TEST_CASE("Boussinesq residual") {
  Grid g = Grid::uniform(2, 32);
  thermo::ThermoParams pr;
  pr.a_rad = 0.0;
  auto co = thermo::linearization(pr);
  CellField theta1(g), G(g), rho1(g);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) {
      auto x = g.cell_center(i, j, 0);
      theta1(i, j) = std::sin(3 * x[0]) + x[1];
      G(i, j) = x[0] - 0.5;
      rho1(i, j) = -co.A * theta1(i, j) + pr.rho_bar / co.dp_drho * G(i, j);
    }
  CHECK(boussinesq_residual(rho1, theta1, G, co, pr.rho_bar) < 1e-12);
  CellField zero(g), c(g, 0.7);
  CHECK(boussinesq_residual(c, zero, zero, co, pr.rho_bar) == doctest::Approx(0.7));
  CHECK_THROWS_AS(boussinesq_residual(c, CellField(Grid::uniform(2, 16)), zero, co, 1.0), ShapeError);
}
