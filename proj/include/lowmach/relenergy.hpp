#pragma once

// Relative energy between a candidate (u, theta1) and a reference (U, Theta),
// coarse-grained defect proxies, the discrete relative energy inequality
// and the Gronwall certificate built on it.

#include <vector>

#include "lowmach/grid.hpp"
#include "lowmach/ob.hpp"
#include "lowmach/thermo.hpp"

namespace lowmach {

/// 1/2 int rho_bar |u - U|^2 + (rho_bar / theta_bar) c_p |theta1 - Theta|^2,
/// midpoint rule with face velocities averaged to cell centres.
double relative_energy(const FaceField& u, const CellField& theta1, const FaceField& U,
                       const CellField& Theta, const ObCoefficients& coeffs);

struct DefectProxies {
  std::vector<thermo::Tensor> R;  // per cell, symmetric d x d block
  CellField E;
  double delta = 0.0;
};

/// Top-hat coarse graining over a box of side delta (cells within delta/2 of
/// the centre along each axis, clipped at the walls):
///   R = rho_bar (<u x u> - <u> x <u>),  E = tr(R) / 2.
/// Throws ResolutionError when delta < 2h.
DefectProxies defect_proxies(const FaceField& u, double delta, double rho_bar = 1.0);

/// Smallest eigenvalue of R over all cells.
double defect_min_eigenvalue(const DefectProxies& d);
/// max over cells of |tr(R) - 2E|.
double defect_trace_gap(const DefectProxies& d);

/// A sampled pair of fields: velocity on faces and a temperature perturbation.
struct FieldSample {
  double t = 0.0;
  FaceField u;
  CellField theta;
};

using FieldTrajectory = std::vector<FieldSample>;

struct ReiSample {
  double t = 0.0;
  double relative_energy = 0.0;
  double defect_energy = 0.0;  // int E_field at t
  double dissipation = 0.0;    // time integral of the two quadratic terms
  double rhs = 0.0;            // time integral of the three right-hand terms
  double residual = 0.0;       // lhs - rhs
};

/// Relative energy inequality evaluated sample by sample:
///   lhs(tau) = E(tau) - E(0) + int E_def(tau)
///              + int_0^tau [2 mu |D(u-U)|^2 + kappa/theta_bar |grad(theta1-Theta)|^2]
///   rhs(tau) = -int_0^tau [rho_bar (u-U)x(u-U) : grad U
///              + rho_bar c_p / theta_bar (theta1-Theta) grad Theta . (u-U) + grad U : R]
/// with trapezoidal time integration. Throws AlignmentError if sample times
/// differ and ShapeError on grid mismatch.
std::vector<ReiSample> rei_residual(const FieldTrajectory& weak, const FieldTrajectory& strong,
                                    const ObCoefficients& coeffs, double delta);

/// c = C0 (max |grad U| + max |grad Theta|), Frobenius norm per cell.
double gronwall_rate(const FaceField& U, const CellField& Theta, double C0 = 1.0);

/// max over cells of the Frobenius norm of grad u.
double max_velocity_gradient(const FaceField& u);

struct GronwallReport {
  std::vector<double> times;
  std::vector<double> E;
  std::vector<double> c;
  std::vector<double> bound;
  bool pass = false;
  double margin = 0.0;
  double slack = 0.0;
};

/// bound(tau) = (E(0) + slack) exp(int_0^tau c dt) with trapezoidal
/// integration; pass iff E <= bound at every sample; margin = min(bound - E).
GronwallReport gronwall_certificate(const std::vector<double>& times, const std::vector<double>& E,
                                    const std::vector<double>& c, double slack);

/// 10 (tolerances + rho_bar (delta/h)^2 / 12 sup|grad u|^2 (1 + T sup|grad U|) h^2).
double slack_budget(double tolerances, double h, double delta, double rho_bar, double T,
                    double sup_grad_u, double sup_grad_U);

}  // namespace lowmach
