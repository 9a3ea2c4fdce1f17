#include "lowmach/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lowmach/errors.hpp"

namespace lowmach {

void ScalingParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(m > 0.0)) throw ConfigError("m must be positive");
  if (dim != 2 && dim != 3) throw ConfigError("dimension must be 2 or 3");
}

double ScalingParams::mach() const { return std::pow(epsilon, m); }
double ScalingParams::froude() const { return std::pow(epsilon, 0.5 * m); }

Placement parse_placement(const std::string& name) {
  if (name == "lattice") return Placement::Lattice;
  if (name == "random") return Placement::Random;
  throw ConfigError("unknown placement mode '" + name + "'");
}

std::string to_string(Placement p) { return p == Placement::Lattice ? "lattice" : "random"; }

double ball_volume(int dim, double r) {
  return dim == 2 ? std::numbers::pi * r * r : 4.0 / 3.0 * std::numbers::pi * r * r * r;
}

double PerforatedGeometry::domain_volume() const { return std::pow(length, scaling.dim); }

namespace {

double unit_sphere_area(int dim) { return dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi; }

std::vector<Vec3> lattice_centers(int dim, double length, double r_d) {
  const double s = 2.0 * r_d;
  const int k = static_cast<int>(std::floor((length - 2.0 * r_d) / s + 1e-12)) + 1;
  std::vector<Vec3> out;
  const int kz = dim == 3 ? k : 1;
  for (int c = 0; c < kz; ++c)
    for (int b = 0; b < k; ++b)
      for (int a = 0; a < k; ++a)
        out.push_back({r_d + a * s, r_d + b * s, dim == 3 ? r_d + c * s : 0.0});
  return out;
}

std::vector<Vec3> random_centers(int dim, double length, double r_d, std::size_t target,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(r_d, length - r_d);
  std::vector<Vec3> out;
  const std::size_t attempts = 1000 * std::max<std::size_t>(target, 1);
  const double min_d2 = 4.0 * r_d * r_d;
  for (std::size_t t = 0; t < attempts && out.size() < target; ++t) {
    Vec3 x{u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
    bool ok = true;
    for (const auto& c : out) {
      double d2 = 0.0;
      for (int a = 0; a < dim; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
      if (d2 < min_d2) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(x);
  }
  return out;
}

}  // namespace

PerforatedGeometry build_perforation(const ScalingParams& scaling, double length,
                                     Placement placement, std::uint64_t seed) {
  scaling.validate();
  if (!(length > 0.0)) throw ConfigError("domain length must be positive");
  PerforatedGeometry g;
  g.scaling = scaling;
  g.length = length;
  g.placement = placement;
  g.seed = seed;
  const double ea = std::pow(scaling.epsilon, scaling.alpha);
  g.hole_radius = 0.9 * ea;
  g.guard_radius = ea;
  g.disjoint_radius = ea + 0.5 * scaling.epsilon;
  if (g.disjoint_radius > 0.5 * length)
    throw GeometryError("no hole fits: eps^alpha + eps/2 exceeds half the domain length");
  auto lattice = lattice_centers(scaling.dim, length, g.disjoint_radius);
  g.centers = placement == Placement::Lattice
                  ? std::move(lattice)
                  : random_centers(scaling.dim, length, g.disjoint_radius, lattice.size(), seed);
  return g;
}

int theoretical_count_bound(const ScalingParams& s, double length) {
  const double r_d = std::pow(s.epsilon, s.alpha) + 0.5 * s.epsilon;
  const double vol = std::pow(length, s.dim);
  const double c = s.dim == 3 ? 3.0 / (4.0 * std::numbers::pi) * vol / (r_d * r_d * r_d)
                              : vol / (std::numbers::pi * r_d * r_d);
  return static_cast<int>(std::floor(c));
}

double asymptotic_count(const ScalingParams& s, double length) {
  return std::pow(length, s.dim) / ball_volume(s.dim, 0.5 * s.epsilon);
}

HoleMeasure hole_measure(const PerforatedGeometry& geom, const Grid* grid) {
  const auto& s = geom.scaling;
  HoleMeasure hm;
  hm.analytic = geom.count() * ball_volume(s.dim, geom.hole_radius);
  hm.bound_ratio = hm.analytic / std::pow(s.epsilon, s.dim * (s.alpha - 1.0));
  if (grid) {
    const CellMask mask = classify_cells(geom, *grid);
    const auto holes = std::count(mask.begin(), mask.end(), kHole);
    hm.rasterized = static_cast<double>(holes) * grid->cell_volume();
  }
  return hm;
}

CellMask classify_cells(const PerforatedGeometry& geom, const Grid& grid) {
  if (grid.dim != geom.scaling.dim) throw ShapeError("grid and geometry dimensions differ");
  CellMask mask(grid.cells(), kFluid);
  const double rh2 = geom.hole_radius * geom.hole_radius;
  const double rg2 = geom.guard_radius * geom.guard_radius;
  for (const auto& c : geom.centers) {
    Index3 lo{0, 0, 0}, hi{1, 1, 1};
    for (int a = 0; a < grid.dim; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::floor((c[a] - geom.guard_radius - grid.origin[a]) / grid.h)) - 1);
      hi[a] = std::min(grid.n[a], static_cast<int>(std::ceil((c[a] + geom.guard_radius - grid.origin[a]) / grid.h)) + 1);
    }
    for (int k = lo[2]; k < hi[2]; ++k)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int i = lo[0]; i < hi[0]; ++i) {
          const Vec3 x = grid.cell_center(i, j, k);
          double d2 = 0.0;
          for (int a = 0; a < grid.dim; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
          auto& cell = mask[grid.index(i, j, k)];
          if (d2 <= rh2) cell = kHole;
          else if (d2 < rg2 && cell == kFluid) cell = kGuard;
        }
  }
  return mask;
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double q = t * (1.0 - t);
  return 30.0 * q * q;
}

double cutoff_profile(double r, double rh, double rg) {
  return 1.0 - smoothstep((r - rh) / (rg - rh));
}

double cutoff_profile_derivative(double r, double rh, double rg) {
  return -smoothstep_derivative((r - rh) / (rg - rh)) / (rg - rh);
}

double cutoff_value(const PerforatedGeometry& geom, const Vec3& x) {
  double sum = 0.0;
  for (const auto& c : geom.centers) {
    double d2 = 0.0;
    for (int a = 0; a < geom.scaling.dim; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
    if (d2 < geom.guard_radius * geom.guard_radius)
      sum += cutoff_profile(std::sqrt(d2), geom.hole_radius, geom.guard_radius);
  }
  return 1.0 - sum;
}

CellField cutoff_g(const PerforatedGeometry& geom, const Grid& grid) {
  const double required = (geom.guard_radius - geom.hole_radius) / 4.0;
  if (grid.h > required)
    throw ResolutionError("grid does not resolve the cutoff annulus", required);
  CellField g(grid, 1.0);
  const double rg2 = geom.guard_radius * geom.guard_radius;
  for (const auto& c : geom.centers) {
    Index3 lo{0, 0, 0}, hi{1, 1, 1};
    for (int a = 0; a < grid.dim; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::floor((c[a] - geom.guard_radius - grid.origin[a]) / grid.h)) - 1);
      hi[a] = std::min(grid.n[a], static_cast<int>(std::ceil((c[a] + geom.guard_radius - grid.origin[a]) / grid.h)) + 1);
    }
    for (int k = lo[2]; k < hi[2]; ++k)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int i = lo[0]; i < hi[0]; ++i) {
          const Vec3 x = grid.cell_center(i, j, k);
          double d2 = 0.0;
          for (int a = 0; a < grid.dim; ++a) d2 += (x[a] - c[a]) * (x[a] - c[a]);
          if (d2 < rg2)
            g(i, j, k) -= cutoff_profile(std::sqrt(d2), geom.hole_radius, geom.guard_radius);
        }
  }
  return g;
}

CutoffNorms single_hole_norms(int dim, double rh, double rg, double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p norms need p >= 1");
  if (std::isinf(p)) return {1.0, smoothstep_derivative(0.5) / (rg - rh)};
  using boost::math::quadrature::gauss_kronrod;
  const double area = unit_sphere_area(dim);
  auto shell = [dim](double r) { return dim == 2 ? r : r * r; };
  const double w = rg - rh;
  // Integrate in the annulus coordinate t = (r - rh) / w for a well-scaled range.
  const double phi_annulus = gauss_kronrod<double, 31>::integrate(
      [&](double t) { return std::pow(1.0 - smoothstep(t), p) * shell(rh + t * w); }, 0.0, 1.0,
      10, 1e-14) * w;
  const double grad_annulus = gauss_kronrod<double, 31>::integrate(
      [&](double t) { return std::pow(smoothstep_derivative(t) / w, p) * shell(rh + t * w); },
      0.0, 1.0, 10, 1e-14) * w;
  CutoffNorms out;
  out.norm_1mg = std::pow(ball_volume(dim, rh) + area * phi_annulus, 1.0 / p);
  out.norm_grad_g = std::pow(area * grad_annulus, 1.0 / p);
  return out;
}

namespace {

CutoffNorms scale_by_count(CutoffNorms one, double count, double p) {
  if (count <= 0.0) return {0.0, 0.0};
  if (std::isinf(p)) return one;
  const double f = std::pow(count, 1.0 / p);
  return {one.norm_1mg * f, one.norm_grad_g * f};
}

}  // namespace

CutoffNorms cutoff_norms(const PerforatedGeometry& geom, double p) {
  return scale_by_count(single_hole_norms(geom.scaling.dim, geom.hole_radius, geom.guard_radius, p),
                        geom.count(), p);
}

CutoffNorms cutoff_norms_asymptotic(const ScalingParams& s, double length, double p) {
  s.validate();
  const double ea = std::pow(s.epsilon, s.alpha);
  return scale_by_count(single_hole_norms(s.dim, 0.9 * ea, ea, p), asymptotic_count(s, length), p);
}

}  // namespace lowmach
