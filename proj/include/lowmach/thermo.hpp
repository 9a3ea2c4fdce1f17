#pragma once

// Constitutive family for a monatomic gas with radiation pressure:
//
//   p(rho, theta) = theta^{5/2} P(rho / theta^{3/2}) + (a/3) theta^4
//   e(rho, theta) = (3/2) theta^{5/2} / rho * P(rho / theta^{3/2}) + a theta^4 / rho
//   s(rho, theta) = S(rho / theta^{3/2}) + (4a/3) theta^3 / rho
//
// with the concrete instance P(Z) = Z + p_inf Z^{5/3}, S(Z) = -ln Z, which
// reduces to p = rho theta + p_inf rho^{5/3} + (a/3) theta^4.

#include <array>

namespace lowmach::thermo {

struct ThermoParams {
  double rho_bar = 1.0;
  double theta_bar = 1.0;
  double a_rad = 1e-3;
  double mu0 = 0.01;
  double eta0 = 0.0;
  double kappa0 = 0.01;
  /// Limit of P(Z)/Z^{5/3} as Z -> infinity.
  double p_inf = 1.0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct PressureProfile {
  double P = 0.0;
  double dP = 0.0;
  double S = 0.0;
  double dS = 0.0;
};

/// P, P' and (for Z > 0) S, S'. Z < 0 throws DomainError; Z == 0 with
/// `with_entropy` throws SingularityError.
PressureProfile eval_P(double Z, double p_inf = 1.0, bool with_entropy = true);

double pressure(double rho, double theta, const ThermoParams& params);
double internal_energy(double rho, double theta, const ThermoParams& params);
double entropy(double rho, double theta, const ThermoParams& params);

struct Partials {
  double dp_drho = 0.0;
  double dp_dtheta = 0.0;
  double de_drho = 0.0;
  double de_dtheta = 0.0;
  double ds_drho = 0.0;
  double ds_dtheta = 0.0;
};

/// Closed-form first derivatives of p, e, s.
Partials partials(double rho, double theta, const ThermoParams& params);

struct Transport {
  double mu = 0.0;
  double eta = 0.0;
  double kappa = 0.0;
};

/// mu = mu0 (1 + theta), eta = eta0 (1 + theta), kappa = kappa0 (1 + theta^3).
Transport transport(double theta, const ThermoParams& params);

using Tensor = std::array<std::array<double, 3>, 3>;
using Vector = std::array<double, 3>;

/// S = mu (grad u + grad u^T - 2/3 div u I) + eta div u I on the leading
/// dim x dim block; remaining entries are zero.
Tensor viscous_stress(double mu, double eta, const Tensor& grad_u, int dim);
Tensor viscous_stress(double theta, const Tensor& grad_u, int dim, const ThermoParams& params);

/// S : grad u evaluated as a sum of non-negative squares, so the result is
/// never negative in floating point.
double viscous_dissipation(double mu, double eta, const Tensor& grad_u, int dim);

/// Fourier flux q = -kappa grad theta.
Vector heat_flux(double kappa, const Vector& grad_theta);
Vector heat_flux(double theta, const Vector& grad_theta, const ThermoParams& params);

/// Ballistic free energy H = rho (e - theta_bar s).
double helmholtz(double rho, double theta, const ThermoParams& params);

/// H(rho, theta) - (rho - rho_bar) dH/drho(rho_bar, theta_bar) - H(rho_bar, theta_bar).
double helmholtz_coercivity(double rho, double theta, const ThermoParams& params);

struct LinearizationCoeffs {
  double A = 0.0;       ///< buoyancy coefficient rho_bar * a_th
  double c_p = 0.0;     ///< specific heat at constant pressure
  double a_th = 0.0;    ///< thermal extension coefficient
  double dp_drho = 0.0;
  double dp_dtheta = 0.0;
  double de_dtheta = 0.0;
  double ds_drho = 0.0;
  double ds_dtheta = 0.0;
};

LinearizationCoeffs linearization(const ThermoParams& params);

/// Same coefficients from central finite differences of p, e, s with step
/// h = 1e-6 max(1, |x|). Used as a cross-check of the closed forms.
LinearizationCoeffs linearization_fd(const ThermoParams& params);

/// Inverts e(rho, theta) = e_target for theta by safeguarded Newton.
double temperature_from_energy(double rho, double e_target, const ThermoParams& params,
                               double theta_guess);

}  // namespace lowmach::thermo
