#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lowmach/geometry.hpp"
#include "lowmach/grid.hpp"
#include "lowmach/thermo.hpp"

namespace lowmach {

struct GammaExponents {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  bool positive1 = false;
  bool positive2 = false;
  bool positive3 = false;
  bool all_positive() const { return positive1 && positive2 && positive3; }
};

/// gamma1 = min(m - 9 alpha/10, 3/2 (alpha-3)/(5 alpha-9))
/// gamma2 = min(3 (alpha-1)/2, m)
/// gamma3 = min(m - alpha, (alpha-3)/2)
GammaExponents gamma_exponents(double m, double alpha);

struct ScalingFit {
  std::vector<std::pair<double, double>> samples;  // (epsilon, value)
  double exponent = 0.0;  // slope of ln(value) against ln(epsilon)
  double r2 = 0.0;
  bool degenerate = false;  // every value was zero
};

/// Least-squares power law fit. Zero values are dropped; if all values are
/// zero the exponent is +infinity with r2 = 1. Throws FitError with fewer
/// than three usable samples at distinct epsilons.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& samples);

/// Names of the seven momentum residual terms, in report order.
const std::array<std::string, 7>& residual_term_names();

/// Three-dimensional decay exponents for the seven terms (reference values).
std::array<double, 7> reference_3d_exponents(double m, double alpha);

/// Smooth fields standing in for a solution with unit-size uniform bounds.
struct SyntheticState {
  std::function<std::array<double, 2>(double, double)> u;
  std::function<std::array<double, 4>(double, double)> grad_u;  // du/dx, du/dy, dv/dx, dv/dy
  std::function<double(double, double)> rho1;
  std::function<double(double, double)> theta1;
  std::array<double, 2> grad_G{1.0, 0.0};
  /// Stream function of the test field phi = perp grad psi_test.
  std::function<double(double, double)> psi_test;
};

/// rho1 = cos(2 pi x), u = perp grad[sin^2(pi x) sin^2(pi y)] / pi,
/// theta1 = cos(pi x) cos(pi y), grad G = (1, 0); the test stream function is
/// sin^2(pi x) sin^2(pi y) scaled so phi has unit W^{1,inf} norm.
SyntheticState default_synthetic_state();

struct ResidualOptions {
  /// Cells across the guard annulus on each per-hole patch grid.
  int cells_per_annulus = 16;
  thermo::ThermoParams thermo;
};

/// Magnitudes of the seven residual integrals (time frozen, psi = 1), each
/// evaluated as the integral of the absolute integrand over the fluid part
/// of the guard balls, where phi - R(phi) is supported. d = 2 only.
std::array<double, 7> momentum_residual_terms(const SyntheticState& state,
                                              const PerforatedGeometry& geom,
                                              const ResidualOptions& opts = {});

struct ResidualSweep {
  std::vector<double> epsilons;
  std::vector<std::array<double, 7>> values;
  std::array<ScalingFit, 7> fits;
  std::array<double, 7> reference;
};

ResidualSweep residual_sweep(const std::vector<double>& epsilons, double alpha, double m,
                             const ResidualOptions& opts = {},
                             const SyntheticState& state = default_synthetic_state());

/// || rho1 + A theta1 - (rho_bar / dp_drho) G ||_{L^2}.
double boussinesq_residual(const CellField& rho1, const CellField& theta1, const CellField& G,
                           const thermo::LinearizationCoeffs& coeffs, double rho_bar);

}  // namespace lowmach
