#include "lowmach/thermo.hpp"

#include <cmath>
#include <string>

#include "lowmach/errors.hpp"

namespace lowmach::thermo {

namespace {

void require_state(double rho, double theta) {
  if (!(rho > 0.0) || !(theta > 0.0))
    throw DomainError("thermodynamic state requires rho > 0 and theta > 0 (rho=" +
                      std::to_string(rho) + ", theta=" + std::to_string(theta) + ")");
}

}  // namespace

void ThermoParams::validate() const {
  if (!(rho_bar > 0.0)) throw ConfigError("rho_bar must be positive");
  if (!(theta_bar > 0.0)) throw ConfigError("theta_bar must be positive");
  if (!(a_rad >= 0.0)) throw ConfigError("a_rad must be non-negative");
  if (!(mu0 > 0.0)) throw ConfigError("mu0 must be positive");
  if (!(eta0 >= 0.0)) throw ConfigError("eta0 must be non-negative");
  if (!(kappa0 > 0.0)) throw ConfigError("kappa0 must be positive");
  if (!(p_inf > 0.0)) throw ConfigError("p_inf must be positive");
}

PressureProfile eval_P(double Z, double p_inf, bool with_entropy) {
  if (!(Z >= 0.0)) throw DomainError("P(Z) requires Z >= 0");
  PressureProfile out;
  const double z23 = std::cbrt(Z * Z);
  out.P = Z + p_inf * Z * z23;
  out.dP = 1.0 + (5.0 / 3.0) * p_inf * z23;
  if (with_entropy) {
    if (Z == 0.0) throw SingularityError("S(Z) = -ln Z is singular at Z = 0");
    out.S = -std::log(Z);
    out.dS = -1.0 / Z;
  }
  return out;
}

double pressure(double rho, double theta, const ThermoParams& pr) {
  require_state(rho, theta);
  const double t2 = theta * theta;
  return rho * theta + pr.p_inf * rho * std::cbrt(rho * rho) + pr.a_rad / 3.0 * t2 * t2;
}

double internal_energy(double rho, double theta, const ThermoParams& pr) {
  require_state(rho, theta);
  const double t2 = theta * theta;
  return 1.5 * (theta + pr.p_inf * std::cbrt(rho * rho)) + pr.a_rad * t2 * t2 / rho;
}

double entropy(double rho, double theta, const ThermoParams& pr) {
  require_state(rho, theta);
  return std::log(theta * std::sqrt(theta) / rho) +
         4.0 * pr.a_rad / 3.0 * theta * theta * theta / rho;
}

Partials partials(double rho, double theta, const ThermoParams& pr) {
  require_state(rho, theta);
  const double a = pr.a_rad;
  const double t3 = theta * theta * theta;
  Partials d;
  d.dp_drho = theta + (5.0 / 3.0) * pr.p_inf * std::cbrt(rho * rho);
  d.dp_dtheta = rho + 4.0 * a / 3.0 * t3;
  d.de_drho = pr.p_inf / std::cbrt(rho) - a * t3 * theta / (rho * rho);
  d.de_dtheta = 1.5 + 4.0 * a * t3 / rho;
  d.ds_drho = -1.0 / rho - 4.0 * a * t3 / (3.0 * rho * rho);
  d.ds_dtheta = 1.5 / theta + 4.0 * a * theta * theta / rho;
  return d;
}

Transport transport(double theta, const ThermoParams& pr) {
  if (!(theta >= 0.0)) throw DomainError("transport coefficients require theta >= 0");
  return {pr.mu0 * (1.0 + theta), pr.eta0 * (1.0 + theta),
          pr.kappa0 * (1.0 + theta * theta * theta)};
}

Tensor viscous_stress(double mu, double eta, const Tensor& g, int dim) {
  double div = 0.0;
  for (int a = 0; a < dim; ++a) div += g[a][a];
  Tensor s{};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      s[a][b] = mu * (g[a][b] + g[b][a]);
      if (a == b) s[a][b] += (eta - 2.0 / 3.0 * mu) * div;
    }
  return s;
}

Tensor viscous_stress(double theta, const Tensor& grad_u, int dim, const ThermoParams& pr) {
  const Transport t = transport(theta, pr);
  return viscous_stress(t.mu, t.eta, grad_u, dim);
}

double viscous_dissipation(double mu, double eta, const Tensor& g, int dim) {
  // S : grad u = 2 mu |D_dev|^2 + 2 mu (1/d - 1/3) (tr D)^2 + eta (tr D)^2
  double tr = 0.0;
  for (int a = 0; a < dim; ++a) tr += g[a][a];
  double dev = 0.0;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      double d = 0.5 * (g[a][b] + g[b][a]);
      if (a == b) d -= tr / dim;
      dev += d * d;
    }
  return 2.0 * mu * dev + (2.0 * mu * (1.0 / dim - 1.0 / 3.0) + eta) * tr * tr;
}

Vector heat_flux(double kappa, const Vector& grad_theta) {
  return {-kappa * grad_theta[0], -kappa * grad_theta[1], -kappa * grad_theta[2]};
}

Vector heat_flux(double theta, const Vector& grad_theta, const ThermoParams& pr) {
  return heat_flux(transport(theta, pr).kappa, grad_theta);
}

double helmholtz(double rho, double theta, const ThermoParams& pr) {
  return rho * (internal_energy(rho, theta, pr) - pr.theta_bar * entropy(rho, theta, pr));
}

double helmholtz_coercivity(double rho, double theta, const ThermoParams& pr) {
  const double rb = pr.rho_bar, tb = pr.theta_bar;
  const Partials d = partials(rb, tb, pr);
  // dH/drho = e + rho de/drho - theta_bar (s + rho ds/drho)
  const double dH = internal_energy(rb, tb, pr) + rb * d.de_drho -
                    tb * (entropy(rb, tb, pr) + rb * d.ds_drho);
  return helmholtz(rho, theta, pr) - (rho - rb) * dH - helmholtz(rb, tb, pr);
}

namespace {

LinearizationCoeffs assemble(const ThermoParams& pr, double dp_drho, double dp_dtheta,
                             double de_dtheta, double ds_drho, double ds_dtheta) {
  LinearizationCoeffs c;
  c.dp_drho = dp_drho;
  c.dp_dtheta = dp_dtheta;
  c.de_dtheta = de_dtheta;
  c.ds_drho = ds_drho;
  c.ds_dtheta = ds_dtheta;
  c.a_th = dp_dtheta / (pr.rho_bar * dp_drho);
  c.A = pr.rho_bar * c.a_th;
  c.c_p = de_dtheta + c.a_th * pr.theta_bar / pr.rho_bar * dp_dtheta;
  return c;
}

template <class F>
double central_difference(F&& f, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

LinearizationCoeffs linearization(const ThermoParams& pr) {
  pr.validate();
  const Partials d = partials(pr.rho_bar, pr.theta_bar, pr);
  return assemble(pr, d.dp_drho, d.dp_dtheta, d.de_dtheta, d.ds_drho, d.ds_dtheta);
}

LinearizationCoeffs linearization_fd(const ThermoParams& pr) {
  pr.validate();
  const double rb = pr.rho_bar, tb = pr.theta_bar;
  auto p_r = [&](double r) { return pressure(r, tb, pr); };
  auto p_t = [&](double t) { return pressure(rb, t, pr); };
  auto e_t = [&](double t) { return internal_energy(rb, t, pr); };
  auto s_r = [&](double r) { return entropy(r, tb, pr); };
  auto s_t = [&](double t) { return entropy(rb, t, pr); };
  return assemble(pr, central_difference(p_r, rb), central_difference(p_t, tb),
                  central_difference(e_t, tb), central_difference(s_r, rb),
                  central_difference(s_t, tb));
}

double temperature_from_energy(double rho, double e_target, const ThermoParams& pr,
                               double theta_guess) {
  if (!(rho > 0.0)) throw DomainError("temperature inversion requires rho > 0");
  // e is strictly increasing in theta: de/dtheta >= 3/2.
  const double e_floor = 1.5 * pr.p_inf * std::cbrt(rho * rho);
  if (!(e_target > e_floor))
    throw NumericalError("internal energy below the theta -> 0 limit; temperature lost positivity");
  double theta = theta_guess > 0.0 ? theta_guess : (e_target - e_floor) / 1.5;
  double lo = 0.0;
  double hi = (e_target - e_floor) / 1.5;  // radiation only adds energy
  for (int it = 0; it < 60; ++it) {
    const double t3 = theta * theta * theta;
    const double f = 1.5 * theta + e_floor + pr.a_rad * t3 * theta / rho - e_target;
    if (f > 0.0) hi = std::min(hi, theta); else lo = std::max(lo, theta);
    const double df = 1.5 + 4.0 * pr.a_rad * t3 / rho;
    double next = theta - f / df;
    if (!(next > lo && next < hi) && hi > lo) next = 0.5 * (lo + hi);
    if (std::abs(next - theta) <= 4e-16 * theta) return next;
    theta = next;
  }
  return theta;
}

}  // namespace lowmach::thermo
