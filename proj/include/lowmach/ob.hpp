#pragma once

// Oberbeck-Boussinesq system on a box with no-slip, insulated walls:
//
//   rho_bar (U_t + U.grad U) + grad Pi = mu div(grad U + grad U^T) - A Theta grad G + f_u
//   div U = 0
//   rho_bar c_p (Theta_t + U.grad Theta) = kappa lap Theta + theta_bar A grad G . U + f_theta
//
// discretized on a MAC grid with central differences and a projection step.

#include <optional>
#include <vector>

#include "lowmach/grid.hpp"
#include "lowmach/thermo.hpp"

namespace lowmach {

struct ObCoefficients {
  double rho_bar = 1.0;
  double theta_bar = 1.0;
  double A = 0.0;
  double c_p = 1.0;
  double mu = 0.0;
  double kappa = 0.0;
};

/// A and c_p from the linearization at (rho_bar, theta_bar); mu and kappa are
/// the transport coefficients evaluated at theta_bar.
ObCoefficients ob_coefficients(const thermo::ThermoParams& params);

struct ObConfig {
  int dim = 2;
  int cells = 64;
  double length = 1.0;
  double final_time = 0.5;
  /// Advective Courant number.
  double cfl = 0.5;
  /// Fraction of the explicit diffusive limit h^2 / (2 d max(nu, chi)).
  double diffusion_safety = 0.5;
  bool rk2 = false;
  /// G(x) = g0 (x1 - L/2) / L.
  double g0 = 1.0;
  /// Use the manufactured solution for initial data and forcing (d = 2).
  bool manufactured = false;
  double theta_amplitude = 0.1;
  double velocity_amplitude = 0.05;
  /// Spacing of stored samples; 0 stores only the initial and final states.
  double sample_interval = 0.0;
  double poisson_tol = 1e-10;
  thermo::ThermoParams thermo;

  /// Throws ConfigError.
  void validate() const;
  Grid grid() const;
  Vec3 grad_G() const;
};

struct ObState {
  FaceField U;
  CellField Theta;
  CellField Pi;
  double t = 0.0;
  long step = 0;
};

/// Pointwise manufactured solution and forcings at (x, y, t) on [0, 1]^2.
struct ManufacturedPoint {
  double U[2] = {0.0, 0.0};
  double Theta = 0.0;
  double Pi = 0.0;
  double f_u[2] = {0.0, 0.0};
  double f_theta = 0.0;
};

ManufacturedPoint manufactured_point(double x, double y, double t, const ObCoefficients& c,
                                     const Vec3& grad_G);

/// Stream function sin^2(pi x) sin^2(pi y) e^{-t} of the manufactured velocity.
double manufactured_stream(double x, double y, double t);

/// Grid samples of the manufactured solution: U and f_u at face centres,
/// Theta, Pi and f_theta at cell centres.
struct ManufacturedFields {
  FaceField U;
  CellField Theta;
  CellField Pi;
  FaceField f_u;
  CellField f_theta;
};

ManufacturedFields manufactured_solution(double t, const Grid& grid, const ObCoefficients& c,
                                         const Vec3& grad_G);

/// Initial state: the manufactured solution at t = 0, or otherwise
/// Theta = amplitude cos(pi x/L) cos(pi y/L) and a small cellular velocity
/// built from a stream function (exactly divergence free).
ObState ob_initial(const ObConfig& config);

/// Stream function of the non-manufactured initial velocity.
double ob_initial_stream(double x, double y, const ObConfig& config);

/// Integral of rho_bar |U|^2 / 2 + rho_bar c_p / (2 theta_bar) Theta^2.
double ob_energy(const ObState& state, const ObCoefficients& c);

struct ObSample {
  double t = 0.0;
  double energy = 0.0;
  double max_div = 0.0;
  ObState state;
};

struct ObTrajectory {
  ObCoefficients coeffs;
  std::vector<ObSample> samples;
  long steps = 0;
  /// L2 errors against the manufactured solution at the final time.
  std::optional<double> error_U;
  std::optional<double> error_Theta;
};

class ObSolver {
 public:
  explicit ObSolver(const ObConfig& config);
  ~ObSolver();

  const ObCoefficients& coeffs() const { return coeffs_; }
  double stable_dt(const ObState& state) const;
  /// One explicit Euler (or Heun) step of size dt followed by projection.
  void step(ObState& state, double dt);
  /// Projects U onto discretely divergence-free fields; returns the
  /// potential phi with U <- U - grad phi.
  CellField project(FaceField& U);

 private:
  void tendency(const ObState& s, FaceField& du, CellField& dtheta);
  void euler(ObState& s, double dt);

  struct Impl;
  ObConfig config_;
  ObCoefficients coeffs_;
  Impl* impl_;
};

ObTrajectory run_ob(const ObConfig& config);

struct ConvergenceRow {
  int cells = 0;
  double h = 0.0;
  double error_U = 0.0;
  double error_Theta = 0.0;
  long steps = 0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// log2 error ratios between consecutive rows.
  std::vector<double> order_U;
  std::vector<double> order_Theta;
};

/// Manufactured runs at each resolution (config.manufactured is forced on).
ConvergenceStudy convergence_study(ObConfig config, const std::vector<int>& resolutions);

}  // namespace lowmach
