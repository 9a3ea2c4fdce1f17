#pragma once

// Scaled Navier-Stokes-Fourier system with Mach number eps^m and Froude
// number eps^{m/2} on a box perforated by Brinkman-penalized holes:
//
//   rho_t + div(rho u) = 0
//   (rho u)_t + div(rho u x u) + eps^{-2m} grad p = div S + eps^{-m} rho grad G
//   (rho e)_t + div(rho e u) + div q = eps^{2m} S : grad u - p div u
//
// Staggered finite volumes: rho, theta and rho e on cells, u on faces.

#include <optional>
#include <string>
#include <vector>

#include "lowmach/geometry.hpp"
#include "lowmach/grid.hpp"
#include "lowmach/thermo.hpp"

namespace lowmach {

struct NsfConfig {
  ScalingParams scaling{0.5, 1.2, 1.0, 2};
  thermo::ThermoParams thermo;
  int cells = 64;
  double length = 1.0;
  /// Acoustic Courant number.
  double cfl = 0.5;
  /// Fraction of the explicit viscous and conductive limits.
  double diffusion_safety = 0.5;
  double eta_pen = 1e-8;
  double final_time = 0.5;
  /// G(x) = g0 (x1 - L/2) / L, made mean-zero over the fluid cells.
  double g0 = 1.0;
  double theta_amplitude = 0.1;
  double velocity_amplitude = 0.05;
  /// Spacing of stored samples; 0 stores only the initial and final states.
  double sample_interval = 0.0;
  /// Directory for a state dump when a step fails; empty disables it.
  std::string failure_dump_dir;

  /// Throws ConfigError.
  void validate() const;
  Grid grid() const;
};

struct NsfState {
  CellField rho;
  FaceField u;
  CellField theta;
  double t = 0.0;
  long step = 0;
};

/// Cell classes, potential G and penalized faces for one geometry.
struct NsfSetup {
  Grid grid;
  CellMask mask;
  CellField G;
  /// 1 on faces adjacent to a hole cell, per component.
  std::array<std::vector<std::uint8_t>, 3> hole_face;
};

NsfSetup nsf_setup(const NsfConfig& config, const PerforatedGeometry& geom);

/// Stream function of the reference initial velocity (before restriction).
double nsf_initial_stream(double x, double y, const NsfConfig& config);

/// Well-prepared data: theta1 = amplitude cos(pi x/L) cos(pi y/L),
/// rho1 = (rho_bar G - dp/dtheta theta1) / (dp/drho), both mean-zero over the
/// fluid cells, and a solenoidal u0 vanishing on the holes.
NsfState init_well_prepared(const NsfConfig& config, const PerforatedGeometry& geom,
                            const NsfSetup& setup);

/// max |dp/drho rho1 + dp/dtheta theta1 - rho_bar G| over fluid cells.
double well_prepared_residual(const NsfState& state, const NsfConfig& config, const NsfSetup& setup);

struct NsfDiagnostics {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double entropy_production = 0.0;
  double residual_measure = 0.0;
  double hole_velocity = 0.0;
};

NsfDiagnostics nsf_diagnostics(const NsfState& state, const NsfConfig& config, const NsfSetup& setup);

class NsfSolver {
 public:
  NsfSolver(const NsfConfig& config, const NsfSetup& setup);

  /// dt from the acoustic CFL condition and the diffusive limits.
  double stable_dt(const NsfState& state) const;
  /// One step of at most dt; returns the step size actually taken (halved
  /// on CFL violation). Throws NumericalError on loss of positivity.
  double step(NsfState& state, double dt);
  int rejections() const { return rejections_; }

 private:
  bool try_step(const NsfState& in, NsfState& out, double dt) const;
  double sound_speed_max(const NsfState& state) const;

  NsfConfig config_;
  const NsfSetup& setup_;
  int rejections_ = 0;
};

struct NsfSample {
  NsfDiagnostics diag;
  NsfState state;
};

struct NsfTrajectory {
  std::vector<NsfSample> samples;
  long steps = 0;
  int rejections = 0;
  double min_entropy_production = 0.0;
  double max_hole_velocity = 0.0;
  double max_residual_measure = 0.0;
};

/// Advances from well-prepared data to final_time, sampling every
/// sample_interval. Diagnostics are tracked at every step for the extrema.
NsfTrajectory run_nsf(const NsfConfig& config, const PerforatedGeometry& geom);

/// Writes rho, theta, the velocity components and the mask as raw dumps.
void dump_nsf_state(const std::string& dir, const std::string& prefix, const NsfState& state,
                    const CellMask& mask);

}  // namespace lowmach
