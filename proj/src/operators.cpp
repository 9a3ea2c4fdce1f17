#include "lowmach/operators.hpp"

#include <algorithm>
#include <cmath>

#include "lowmach/errors.hpp"

namespace lowmach {

namespace {

// Face neighbours of a cell that exist inside the grid; -1 marks the wall.
int neighbours(const Grid& g, std::size_t c, std::array<long, 6>& out) {
  const long n0 = g.n[0], n1 = g.n[1];
  const long i = static_cast<long>(c % n0);
  const long j = static_cast<long>((c / n0) % n1);
  const long k = static_cast<long>(c / (n0 * n1));
  const long idx = static_cast<long>(c);
  int m = 0;
  out[m++] = i > 0 ? idx - 1 : -1;
  out[m++] = i < n0 - 1 ? idx + 1 : -1;
  out[m++] = j > 0 ? idx - n0 : -1;
  out[m++] = j < n1 - 1 ? idx + n0 : -1;
  if (g.dim == 3) {
    out[m++] = k > 0 ? idx - n0 * n1 : -1;
    out[m++] = k < g.n[2] - 1 ? idx + n0 * n1 : -1;
  }
  return m;
}

}  // namespace

std::vector<std::vector<std::size_t>> hole_components(const Grid& grid, const CellMask& mask) {
  if (mask.size() != grid.cells()) throw ShapeError("mask size does not match grid");
  std::vector<std::vector<std::size_t>> comps;
  std::vector<char> seen(mask.size(), 0);
  std::array<long, 6> nb{};
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (mask[s] != kHole || seen[s]) continue;
    std::vector<std::size_t> comp{s};
    seen[s] = 1;
    for (std::size_t q = 0; q < comp.size(); ++q) {
      const int m = neighbours(grid, comp[q], nb);
      for (int t = 0; t < m; ++t)
        if (nb[t] >= 0 && mask[nb[t]] == kHole && !seen[nb[t]]) {
          seen[nb[t]] = 1;
          comp.push_back(static_cast<std::size_t>(nb[t]));
        }
    }
    comps.push_back(std::move(comp));
  }
  return comps;
}

CellField extend(const CellField& field, const CellMask& mask, ExtensionStats* stats, double tol) {
  const Grid& g = field.grid;
  CellField out = field;
  auto comps = hole_components(g, mask);
  std::vector<long> local(g.cells(), -1);
  std::array<long, 6> nb{};
  ExtensionStats st;
  st.components = static_cast<int>(comps.size());
  const double diag = 2.0 * g.dim;

  for (const auto& comp : comps) {
    const std::size_t n = comp.size();
    for (std::size_t q = 0; q < n; ++q) local[comp[q]] = static_cast<long>(q);

    // Right-hand side from the Dirichlet data on the surrounding cells.
    std::vector<double> b(n, 0.0);
    double data_sum = 0.0;
    int data_count = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const int m = neighbours(g, comp[q], nb);
      if (m < 2 * g.dim) throw GeometryError("hole touches the domain boundary; extension needs surrounding fluid");
      for (int t = 0; t < m; ++t) {
        if (nb[t] < 0) throw GeometryError("hole touches the domain boundary; extension needs surrounding fluid");
        if (local[nb[t]] < 0) {
          b[q] += field.values[nb[t]];
          data_sum += field.values[nb[t]];
          ++data_count;
        }
      }
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      for (std::size_t q = 0; q < n; ++q) {
        double s = diag * x[q];
        const int m = neighbours(g, comp[q], nb);
        for (int t = 0; t < m; ++t)
          if (local[nb[t]] >= 0) s -= x[local[nb[t]]];
        y[q] = s;
      }
    };

    std::vector<double> x(n, data_count ? data_sum / data_count : 0.0), r(n), p(n), ap(n);
    apply(x, ap);
    double bnorm = 0.0, rr = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      r[q] = b[q] - ap[q];
      p[q] = r[q];
      rr += r[q] * r[q];
      bnorm += b[q] * b[q];
    }
    const double target = tol * tol * std::max(bnorm, 1e-300);
    int it = 0;
    while (rr > target && it < 10 * static_cast<int>(n) + 100) {
      apply(p, ap);
      double pap = 0.0;
      for (std::size_t q = 0; q < n; ++q) pap += p[q] * ap[q];
      const double a = rr / pap;
      double rr_new = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        x[q] += a * p[q];
        r[q] -= a * ap[q];
        rr_new += r[q] * r[q];
      }
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t q = 0; q < n; ++q) p[q] = r[q] + beta * p[q];
      ++it;
    }
    if (rr > 100.0 * target) throw SolverError("harmonic extension did not converge");
    st.max_iterations = std::max(st.max_iterations, it);
    st.max_residual = std::max(st.max_residual, std::sqrt(rr / std::max(bnorm, 1e-300)));
    for (std::size_t q = 0; q < n; ++q) {
      out.values[comp[q]] = x[q];
      local[comp[q]] = -1;
    }
  }
  if (stats) *stats = st;
  return out;
}

std::vector<std::uint8_t> fluid_region(const CellMask& mask) {
  std::vector<std::uint8_t> r(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) r[i] = mask[i] != kHole;
  return r;
}

double w12_norm(const CellField& f, const std::vector<std::uint8_t>& region) {
  const Grid& g = f.grid;
  if (region.size() != g.cells()) throw ShapeError("region size does not match grid");
  double l2 = 0.0, grad = 0.0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t c = g.index(i, j, k);
        if (!region[c]) continue;
        l2 += f.values[c] * f.values[c];
        const std::size_t step[3] = {1, static_cast<std::size_t>(g.n[0]),
                                     static_cast<std::size_t>(g.n[0]) * g.n[1]};
        const int pos[3] = {i, j, k};
        for (int a = 0; a < g.dim; ++a) {
          if (pos[a] + 1 >= g.n[a] || !region[c + step[a]]) continue;
          const double d = (f.values[c + step[a]] - f.values[c]) / g.h;
          grad += d * d;
        }
      }
  return std::sqrt((l2 + grad) * g.cell_volume());
}

double w12_norm(const CellField& f) {
  return w12_norm(f, std::vector<std::uint8_t>(f.grid.cells(), 1));
}

double w12_norm(const FaceField& u) {
  const Grid& g = u.grid;
  double l2 = 0.0, grad = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    const Index3 d = g.face_dims(a);
    const std::size_t step[3] = {1, static_cast<std::size_t>(d[0]),
                                 static_cast<std::size_t>(d[0]) * d[1]};
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          const std::size_t c = g.face_index(a, i, j, k);
          const double v = u.comp[a][c];
          l2 += v * v;
          const int pos[3] = {i, j, k};
          for (int b = 0; b < g.dim; ++b) {
            if (pos[b] + 1 >= d[b]) continue;
            const double dv = (u.comp[a][c + step[b]] - v) / g.h;
            grad += dv * dv;
          }
        }
  }
  return std::sqrt((l2 + grad) * g.cell_volume());
}

// ---------------------------------------------------------------------------

FaceField perp_gradient(const NodeField& psi) {
  const Grid& g = psi.grid;
  if (g.dim != 2) throw UnsupportedInputError("stream functions are only supported in two dimensions");
  FaceField u(g);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i <= g.n[0]; ++i) u.at(0, i, j) = (psi(i, j + 1) - psi(i, j)) / g.h;
  for (int j = 0; j <= g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) u.at(1, i, j) = -(psi(i + 1, j) - psi(i, j)) / g.h;
  return u;
}

NodeField sample_nodes(const Grid& grid, const std::function<double(double, double)>& f) {
  NodeField psi(grid);
  const Index3 d = grid.node_dims();
  for (int j = 0; j < d[1]; ++j)
    for (int i = 0; i < d[0]; ++i) {
      const Vec3 x = grid.node_position(i, j, 0);
      psi(i, j) = f(x[0], x[1]);
    }
  return psi;
}

SolenoidalField from_stream(const NodeField& psi) { return {perp_gradient(psi), psi}; }

namespace {

double bilinear(const NodeField& psi, double x, double y) {
  const Grid& g = psi.grid;
  const double fx = std::clamp((x - g.origin[0]) / g.h, 0.0, static_cast<double>(g.n[0]));
  const double fy = std::clamp((y - g.origin[1]) / g.h, 0.0, static_cast<double>(g.n[1]));
  const int i = std::min(static_cast<int>(fx), g.n[0] - 1);
  const int j = std::min(static_cast<int>(fy), g.n[1] - 1);
  const double tx = fx - i, ty = fy - j;
  return (1 - tx) * (1 - ty) * psi(i, j) + tx * (1 - ty) * psi(i + 1, j) +
         (1 - tx) * ty * psi(i, j + 1) + tx * ty * psi(i + 1, j + 1);
}

}  // namespace

RestrictionResult restrict_stream(const NodeField& psi, const PerforatedGeometry& geom,
                                  const std::function<double(double, double)>& psi_at) {
  const Grid& g = psi.grid;
  if (g.dim != 2 || geom.scaling.dim != 2)
    throw UnsupportedInputError("the restriction operator is implemented in two dimensions only");
  const double required = (geom.guard_radius - geom.hole_radius) / 4.0;
  if (g.h > required) throw ResolutionError("grid does not resolve the cutoff annulus", required);

  NodeField out = psi;
  const Index3 nd = g.node_dims();
  std::vector<double> phi;
  for (const auto& c : geom.centers) {
    const double rg = geom.guard_radius;
    const int i0 = std::max(0, static_cast<int>(std::floor((c[0] - rg - g.origin[0]) / g.h)) - 1);
    const int i1 = std::min(nd[0] - 1, static_cast<int>(std::ceil((c[0] + rg - g.origin[0]) / g.h)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((c[1] - rg - g.origin[1]) / g.h)) - 1);
    const int j1 = std::min(nd[1] - 1, static_cast<int>(std::ceil((c[1] + rg - g.origin[1]) / g.h)) + 1);
    if (i1 < i0 || j1 < j0) continue;
    const int w = i1 - i0 + 1;
    phi.assign(static_cast<std::size_t>(w) * (j1 - j0 + 1), 0.0);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const Vec3 x = g.node_position(i, j, 0);
        const double r = std::hypot(x[0] - c[0], x[1] - c[1]);
        if (r < rg) phi[(j - j0) * w + (i - i0)] = cutoff_profile(r, geom.hole_radius, rg);
      }
    // Every corner of a hole cell takes the centre value, so faces of hole
    // cells carry exactly zero velocity.
    const double rh2 = geom.hole_radius * geom.hole_radius;
    for (int j = j0; j < std::min(j1, g.n[1]); ++j)
      for (int i = i0; i < std::min(i1, g.n[0]); ++i) {
        const Vec3 x = g.cell_center(i, j, 0);
        if ((x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) > rh2) continue;
        for (int dj = 0; dj < 2; ++dj)
          for (int di = 0; di < 2; ++di) phi[(j + dj - j0) * w + (i + di - i0)] = 1.0;
      }
    const double centre = psi_at ? psi_at(c[0], c[1]) : bilinear(psi, c[0], c[1]);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const double f = phi[(j - j0) * w + (i - i0)];
        if (f == 1.0) out(i, j) = centre;
        else if (f > 0.0) out(i, j) = psi(i, j) - f * (psi(i, j) - centre);
      }
  }
  return {perp_gradient(out), std::move(out)};
}

FaceField restrict_field(const SolenoidalField& phi, const PerforatedGeometry& geom) {
  if (!phi.stream)
    throw UnsupportedInputError(
        "restriction of general fields is not supported; supply a stream function");
  return restrict_stream(*phi.stream, geom).velocity;
}

// ---------------------------------------------------------------------------

EssResSplit ess_res_split(const CellField& rho, const CellField& theta, const CellMask& mask,
                          const thermo::ThermoParams& pr) {
  const Grid& g = rho.grid;
  if (!g.same_shape(theta.grid) || mask.size() != g.cells())
    throw ShapeError("ess_res_split inputs live on different grids");
  EssResSplit s;
  s.classes.assign(g.cells(), kEssential);
  std::size_t n_ess = 0, n_res = 0, n_hole = 0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    if (mask[c] == kHole) {
      s.classes[c] = kHoleSet;
      ++n_hole;
      continue;
    }
    const double r = rho.values[c], t = theta.values[c];
    const bool ess = r > 0.5 * pr.rho_bar && r < 2.0 * pr.rho_bar && t > 0.5 * pr.theta_bar &&
                     t < 2.0 * pr.theta_bar;
    s.classes[c] = ess ? kEssential : kResidual;
    ++(ess ? n_ess : n_res);
  }
  const double v = g.cell_volume();
  s.measure_ess = n_ess * v;
  s.measure_res = n_res * v;
  s.measure_holes = n_hole * v;
  return s;
}

PerturbationFields perturbation_fields(const CellField& rho, const CellField& theta,
                                       const CellMask& mask, const thermo::ThermoParams& pr,
                                       double mach) {
  const Grid& g = rho.grid;
  if (!g.same_shape(theta.grid) || mask.size() != g.cells())
    throw ShapeError("perturbation inputs live on different grids");
  if (!(mach > 0.0)) throw ConfigError("Mach scale must be positive");
  PerturbationFields pf{CellField(g), CellField(g), CellField(g),
                        CellField(g), CellField(g), CellField(g)};
  const double p_bar = thermo::pressure(pr.rho_bar, pr.theta_bar, pr);
  const double s_bar = thermo::entropy(pr.rho_bar, pr.theta_bar, pr);
  const double k_bar = thermo::transport(pr.theta_bar, pr).kappa;
  const double ln_bar = std::log(pr.theta_bar);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    if (mask[c] == kHole) continue;
    const double r = rho.values[c], t = theta.values[c];
    pf.rho1.values[c] = (r - pr.rho_bar) / mach;
    pf.theta1.values[c] = (t - pr.theta_bar) / mach;
    pf.ell1.values[c] = (std::log(t) - ln_bar) / mach;
    pf.p1.values[c] = (thermo::pressure(r, t, pr) - p_bar) / mach;
    pf.s1.values[c] = (thermo::entropy(r, t, pr) - s_bar) / mach;
    pf.kappa1.values[c] = (thermo::transport(t, pr).kappa - k_bar) / mach;
  }
  pf.theta1 = extend(pf.theta1, mask);
  pf.ell1 = extend(pf.ell1, mask);
  return pf;
}

}  // namespace lowmach
