#pragma once

// Perforated boxes: N small obstacles of radius 0.9 eps^alpha, each sitting
// inside a guard ball of radius eps^alpha and a private ball of radius
// eps^alpha + eps/2. Cutoffs phi_n equal 1 on the obstacle, 0 outside the
// guard ball, and follow a quintic smoothstep across the annulus.

#include <cstdint>
#include <string>
#include <vector>

#include "lowmach/grid.hpp"

namespace lowmach {

struct ScalingParams {
  double epsilon = 0.5;
  double alpha = 3.5;
  double m = 4.0;
  int dim = 2;

  void validate() const;
  double mach() const;     // eps^m
  double froude() const;   // eps^{m/2}
  /// 3 < alpha < m, the regime in which the limit theory applies.
  bool theory_regime() const { return alpha > 3.0 && alpha < m; }
};

enum class Placement { Lattice, Random };

Placement parse_placement(const std::string& name);
std::string to_string(Placement p);

enum CellClass : std::uint8_t { kFluid = 0, kHole = 1, kGuard = 2 };

struct PerforatedGeometry {
  ScalingParams scaling;
  double length = 1.0;  // domain is [0, length]^dim
  Placement placement = Placement::Lattice;
  std::uint64_t seed = 0;
  std::vector<Vec3> centers;
  double hole_radius = 0.0;
  double guard_radius = 0.0;
  double disjoint_radius = 0.0;

  int count() const { return static_cast<int>(centers.size()); }
  double domain_volume() const;
};

PerforatedGeometry build_perforation(const ScalingParams& scaling, double length,
                                     Placement placement = Placement::Lattice,
                                     std::uint64_t seed = 0);

/// floor((3/4pi)|Omega| r_D^{-3}) in 3D, floor(|Omega| / (pi r_D^2)) in 2D.
int theoretical_count_bound(const ScalingParams& scaling, double length);

/// Leading-order count |Omega| / (|B_1| (eps/2)^d) as eps -> 0, not floored.
double asymptotic_count(const ScalingParams& scaling, double length);

/// Volume of the d-ball of radius r.
double ball_volume(int dim, double r);

struct HoleMeasure {
  double analytic = 0.0;     // N |B_{0.9}| eps^{d alpha}
  double rasterized = -1.0;  // cell count x h^d, or -1 when no grid was given
  double bound_ratio = 0.0;  // analytic / eps^{d (alpha - 1)}
};

HoleMeasure hole_measure(const PerforatedGeometry& geom, const Grid* grid = nullptr);

/// Per-cell classification by cell centre: hole, guard annulus, or fluid.
CellMask classify_cells(const PerforatedGeometry& geom, const Grid& grid);

/// S(t) = 6t^5 - 15t^4 + 10t^3 clamped to [0, 1].
double smoothstep(double t);
double smoothstep_derivative(double t);

/// Radial profile of phi_n: 1 for r <= hole_radius, 0 for r >= guard_radius.
double cutoff_profile(double r, double hole_radius, double guard_radius);
double cutoff_profile_derivative(double r, double hole_radius, double guard_radius);

/// g(x) = 1 - sum_n phi_n(|x - x_n|).
double cutoff_value(const PerforatedGeometry& geom, const Vec3& x);

/// g sampled at cell centres. Throws ResolutionError unless
/// h <= (guard_radius - hole_radius) / 4.
CellField cutoff_g(const PerforatedGeometry& geom, const Grid& grid);

struct CutoffNorms {
  double norm_1mg = 0.0;
  double norm_grad_g = 0.0;
};

/// ||phi_n||_{L^p} and ||grad phi_n||_{L^p} for one hole by radial quadrature.
/// p = infinity is selected with std::numeric_limits<double>::infinity().
CutoffNorms single_hole_norms(int dim, double hole_radius, double guard_radius, double p);

/// Norms of 1 - g and grad g for the achieved hole count (supports disjoint).
CutoffNorms cutoff_norms(const PerforatedGeometry& geom, double p);

/// Same norms with the asymptotic count in place of the achieved lattice count.
CutoffNorms cutoff_norms_asymptotic(const ScalingParams& scaling, double length, double p);

}  // namespace lowmach
