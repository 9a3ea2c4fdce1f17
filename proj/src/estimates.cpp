#include "lowmach/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "lowmach/errors.hpp"
#include "lowmach/operators.hpp"

namespace lowmach {

GammaExponents gamma_exponents(double m, double alpha) {
  if (!(m > 0.0) || !(alpha > 0.0)) throw ConfigError("gamma exponents need m > 0 and alpha > 0");
  const double denom = 5.0 * alpha - 9.0;
  if (denom == 0.0) throw SingularityError("5 alpha - 9 vanishes");
  GammaExponents g;
  g.gamma1 = std::min(m - 0.9 * alpha, 1.5 * (alpha - 3.0) / denom);
  g.gamma2 = std::min(1.5 * (alpha - 1.0), m);
  g.gamma3 = std::min(m - alpha, 0.5 * (alpha - 3.0));
  g.positive1 = g.gamma1 > 0.0;
  g.positive2 = g.gamma2 > 0.0;
  g.positive3 = g.gamma3 > 0.0;
  return g;
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& samples) {
  ScalingFit fit;
  fit.samples = samples;
  std::vector<std::pair<double, double>> use;
  std::set<double> all_eps;
  bool any_nonzero = false;
  for (const auto& [e, v] : samples) {
    if (!(e > 0.0) || !std::isfinite(v) || v < 0.0)
      throw FitError("scaling fit needs positive epsilon and finite non-negative values");
    all_eps.insert(e);
    if (v > 0.0) {
      use.emplace_back(e, v);
      any_nonzero = true;
    }
  }
  if (all_eps.size() < 3) throw FitError("scaling fit needs at least three distinct epsilon values");
  if (!any_nonzero) {
    fit.exponent = std::numeric_limits<double>::infinity();
    fit.r2 = 1.0;
    fit.degenerate = true;
    return fit;
  }
  std::set<double> use_eps;
  for (const auto& s : use) use_eps.insert(s.first);
  if (use_eps.size() < 3) throw FitError("fewer than three non-zero samples at distinct epsilon");

  const double n = static_cast<double>(use.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [e, v] : use) {
    mx += std::log(e);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [e, v] : use) {
    const double dx = std::log(e) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.exponent = sxy / sxx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

const std::array<std::string, 7>& residual_term_names() {
  static const std::array<std::string, 7> names{"I1_1", "I1_2", "I2_1", "I2_2",
                                                "I3_1", "I3_2", "I4"};
  return names;
}

std::array<double, 7> reference_3d_exponents(double m, double a) {
  const double d = 5.0 * a - 9.0;
  return {std::min(3.0, 1.5 * (a - 1.0)),
          std::min(m + 0.4, m + 0.3 * (a - 3.0)),
          std::min(0.5, 0.5 * (a - 2.0)),
          std::min(m + 0.1, m - 0.9 * a),
          std::min(1.5 * (a - 3.0) / d, 0.5 * (2.0 * a - 3.0) * (a - 3.0) / d),
          std::min(m + 0.5, m - 0.5 * a),
          std::min(0.6, 0.6 * a - 1.0)};
}

SyntheticState default_synthetic_state() {
  using std::numbers::pi;
  SyntheticState s;
  // u = (d/dy, -d/dx) of sin^2(pi x) sin^2(pi y) / pi
  s.u = [](double x, double y) {
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    return std::array<double, 2>{sx * sx * std::sin(2 * pi * y), -sy * sy * std::sin(2 * pi * x)};
  };
  s.grad_u = [](double x, double y) {
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    const double s2x = std::sin(2 * pi * x), s2y = std::sin(2 * pi * y);
    return std::array<double, 4>{pi * s2x * s2y, 2 * pi * sx * sx * std::cos(2 * pi * y),
                                 -2 * pi * sy * sy * std::cos(2 * pi * x), -pi * s2y * s2x};
  };
  s.rho1 = [](double x, double) { return std::cos(2 * pi * x); };
  s.theta1 = [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); };
  s.grad_G = {1.0, 0.0};
  // max |phi| = pi and max |grad phi| = 2 pi^2 for the unscaled stream function.
  const double scale = 1.0 / (pi + 2.0 * pi * pi);
  s.psi_test = [scale](double x, double y) {
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    return scale * sx * sx * sy * sy;
  };
  return s;
}

std::array<double, 7> momentum_residual_terms(const SyntheticState& st,
                                              const PerforatedGeometry& geom,
                                              const ResidualOptions& opts) {
  if (geom.scaling.dim != 2) throw UnsupportedInputError("residual terms are evaluated in two dimensions");
  if (opts.cells_per_annulus < 4)
    throw ResolutionError("at least four cells across the cutoff annulus are required",
                          (geom.guard_radius - geom.hole_radius) / 4.0);
  const auto& tp = opts.thermo;
  const double mach = geom.scaling.mach();
  const double rg = geom.guard_radius, rh = geom.hole_radius;
  const double h = (rg - rh) / opts.cells_per_annulus;
  const int n = 2 * static_cast<int>(std::ceil(rg / h)) + 8;
  std::array<double, 7> acc{};

  for (const auto& c : geom.centers) {
    Grid patch;
    patch.dim = 2;
    patch.n = {n, n, 1};
    patch.h = h;
    patch.origin = {c[0] - 0.5 * n * h, c[1] - 0.5 * n * h, 0.0};
    PerforatedGeometry one = geom;
    one.centers = {c};

    const NodeField psi = sample_nodes(patch, st.psi_test);
    const FaceField phi = perp_gradient(psi);
    const FaceField rphi = restrict_stream(psi, one, st.psi_test).velocity;
    FaceField d = phi;
    for (int a = 0; a < 2; ++a)
      for (std::size_t q = 0; q < d.comp[a].size(); ++q) d.comp[a][q] -= rphi.comp[a][q];
    const CellMask mask = classify_cells(one, patch);

    std::array<double, 7> local{};
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        if (mask[patch.index(i, j)] == kHole) continue;
        const double dx = 0.5 * (d.at(0, i, j) + d.at(0, i + 1, j));
        const double dy = 0.5 * (d.at(1, i, j) + d.at(1, i, j + 1));
        // grad of (phi - R phi) at the cell centre: g[a][b] = d(d_a)/dx_b
        const double g00 = (d.at(0, i + 1, j) - d.at(0, i, j)) / h;
        const double g01 = (d.at(0, i, j + 1) + d.at(0, i + 1, j + 1) - d.at(0, i, j - 1) -
                            d.at(0, i + 1, j - 1)) / (4.0 * h);
        const double g10 = (d.at(1, i + 1, j) + d.at(1, i + 1, j + 1) - d.at(1, i - 1, j) -
                            d.at(1, i - 1, j + 1)) / (4.0 * h);
        const double g11 = (d.at(1, i, j + 1) - d.at(1, i, j)) / h;
        if (dx == 0.0 && dy == 0.0 && g00 == 0.0 && g01 == 0.0 && g10 == 0.0 && g11 == 0.0) continue;

        const Vec3 x = patch.cell_center(i, j, 0);
        const auto u = st.u(x[0], x[1]);
        const auto gu = st.grad_u(x[0], x[1]);
        const double r1 = st.rho1(x[0], x[1]);
        const double t1 = st.theta1(x[0], x[1]);

        const double u_dot_d = u[0] * dx + u[1] * dy;
        const double uu_grad = u[0] * u[0] * g00 + u[0] * u[1] * (g01 + g10) + u[1] * u[1] * g11;
        const double div = gu[0] + gu[3];
        // grad u + grad u^T - div u I in two dimensions
        const double b00 = 2.0 * gu[0] - div, b11 = 2.0 * gu[3] - div, b01 = gu[1] + gu[2];
        const double strain = std::sqrt(b00 * b00 + b11 * b11 + 2.0 * b01 * b01);
        const double grad_d = std::sqrt(g00 * g00 + g01 * g01 + g10 * g10 + g11 * g11);
        const double visc = tp.mu0 * strain + tp.eta0 * std::abs(div);

        local[0] += tp.rho_bar * std::abs(u_dot_d);
        local[1] += mach * std::abs(r1 * u_dot_d);
        local[2] += tp.rho_bar * std::abs(uu_grad);
        local[3] += mach * std::abs(r1 * uu_grad);
        local[4] += (1.0 + tp.theta_bar) * visc * grad_d;
        local[5] += mach * std::abs(t1) * visc * grad_d;
        local[6] += std::abs(r1 * (st.grad_G[0] * dx + st.grad_G[1] * dy));
      }
    for (int t = 0; t < 7; ++t) acc[t] += local[t] * h * h;
  }
  return acc;
}

ResidualSweep residual_sweep(const std::vector<double>& epsilons, double alpha, double m,
                             const ResidualOptions& opts, const SyntheticState& state) {
  ResidualSweep sw;
  sw.epsilons = epsilons;
  std::sort(sw.epsilons.begin(), sw.epsilons.end(), std::greater<>());
  for (double e : sw.epsilons) {
    auto geom = build_perforation({e, alpha, m, 2}, 1.0);
    sw.values.push_back(momentum_residual_terms(state, geom, opts));
  }
  for (int t = 0; t < 7; ++t) {
    std::vector<std::pair<double, double>> s;
    for (std::size_t k = 0; k < sw.epsilons.size(); ++k) s.emplace_back(sw.epsilons[k], sw.values[k][t]);
    sw.fits[t] = scaling_fit(s);
  }
  sw.reference = reference_3d_exponents(m, alpha);
  return sw;
}

double boussinesq_residual(const CellField& rho1, const CellField& theta1, const CellField& G,
                           const thermo::LinearizationCoeffs& coeffs, double rho_bar) {
  if (!rho1.grid.same_shape(theta1.grid) || !rho1.grid.same_shape(G.grid))
    throw ShapeError("Boussinesq residual inputs live on different grids");
  const double k = rho_bar / coeffs.dp_drho;
  double s = 0.0;
  for (std::size_t c = 0; c < rho1.values.size(); ++c) {
    const double r = rho1.values[c] + coeffs.A * theta1.values[c] - k * G.values[c];
    s += r * r;
  }
  return std::sqrt(s * rho1.grid.cell_volume());
}

}  // namespace lowmach
