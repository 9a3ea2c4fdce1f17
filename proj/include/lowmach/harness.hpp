#pragma once

// Experiment configuration, the epsilon sweep, report writers and on-disk
// trajectories. Everything the command line tool does goes through here.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lowmach/estimates.hpp"
#include "lowmach/geometry.hpp"
#include "lowmach/nsf.hpp"
#include "lowmach/ob.hpp"
#include "lowmach/relenergy.hpp"

namespace lowmach {

struct EstimatesSettings {
  double m = 4.0;
  double alpha = 3.5;
  std::vector<double> epsilons{0.5, 0.35, 0.25, 0.18};
  int cells_per_annulus = 16;
};

struct LabConfig {
  ScalingParams scaling{0.5, 2.5, 1.0, 2};
  thermo::ThermoParams thermo;
  int cells = 128;
  double length = 1.0;
  double final_time = 0.5;
  double sample_interval = 0.1;
  double cfl = 0.5;
  double diffusion_safety = 0.5;
  double eta_pen = 1e-8;
  double g0 = 1.0;
  double theta_amplitude = 0.1;
  double velocity_amplitude = 0.05;
  bool ob_rk2 = false;
  bool ob_manufactured = false;
  double poisson_tol = 1e-10;
  Placement placement = Placement::Lattice;
  std::uint64_t seed = 0;
  std::vector<double> sweep_epsilons{0.5, 0.4, 0.3};
  int workers = 1;
  /// Coarse-graining width of the defect proxies, in cells.
  double delta_cells = 4.0;
  double gronwall_C0 = 1.0;
  EstimatesSettings estimates;
};

/// Parses the JSON layout documented in docs/config.md. Unknown keys and
/// out-of-range values throw ConfigError.
LabConfig parse_config(const nlohmann::json& j);
LabConfig load_config(const std::string& path);
nlohmann::json to_json(const LabConfig& c);

NsfConfig nsf_config(const LabConfig& c);
NsfConfig nsf_config(const LabConfig& c, double epsilon);
ObConfig ob_config(const LabConfig& c);
PerforatedGeometry lab_geometry(const LabConfig& c, double epsilon);

// ---------------------------------------------------------------------------
// Sweep

struct SweepRow {
  double epsilon = 0.0;
  int n_holes = 0;
  double m_holes = 0.0;             // analytic measure
  double m_holes_rasterized = 0.0;  // cell count times h^d
  double m_res_max = 0.0;
  double relative_energy_final = 0.0;
  double boussinesq_residual = 0.0;
  double velocity_gap = 0.0;
  double temperature_gap = 0.0;
  double hole_velocity_max = 0.0;
  double min_entropy_production = 0.0;
  long steps = 0;
  std::string status = "ok";
  std::string message;
};

struct MonotoneVerdict {
  std::string column;
  bool strictly_decreasing = false;
  std::optional<ScalingFit> fit;
};

struct ConvergenceReport {
  LabConfig config;
  std::vector<SweepRow> rows;  // decreasing epsilon
  std::vector<MonotoneVerdict> verdicts;
  bool theory_flags = false;   // 3 < alpha < m for the configured scaling
  std::string regime;          // "theory" or "relaxed"
  long ob_steps = 0;
};

/// Runs the OB reference once and one NSF case per epsilon. A failing case
/// yields a row with status "failed" and NaN values. Throws FitError for
/// fewer than three distinct epsilons.
ConvergenceReport sweep(const LabConfig& config);

const std::vector<std::string>& sweep_columns();
void write_sweep_csv(const std::string& path, const ConvergenceReport& r);
nlohmann::json sweep_json(const ConvergenceReport& r);

/// L2-in-time (trapezoid over samples) of per-sample norms.
double l2_in_time(const std::vector<double>& times, const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Estimates track

struct GammaMapCell {
  double m = 0.0;
  double alpha = 0.0;
  GammaExponents gamma;
  bool theory = false;
};

/// gamma exponents on an n x n grid of (m, alpha) in [m_lo, m_hi] x [a_lo, a_hi].
std::vector<GammaMapCell> gamma_map(int n, double m_lo, double m_hi, double a_lo, double a_hi);
void write_gamma_map_csv(const std::string& path, const std::vector<GammaMapCell>& cells);
void write_residual_sweep_csv(const std::string& path, const ResidualSweep& s);
nlohmann::json residual_sweep_json(const ResidualSweep& s, double m, double alpha);

// ---------------------------------------------------------------------------
// Trajectories on disk: manifest.json plus raw dumps per sample.

void write_ob_trajectory(const std::string& dir, const ObTrajectory& tr, const LabConfig& c);
void write_nsf_trajectory(const std::string& dir, const NsfTrajectory& tr, const LabConfig& c,
                          const PerforatedGeometry& geom);
/// Velocity and temperature perturbation samples of either kind.
FieldTrajectory read_trajectory(const std::string& dir);

struct CompareReport {
  std::vector<ReiSample> rei;
  GronwallReport gronwall;
  double delta = 0.0;
};

/// Relative energy inequality and Gronwall certificate of `weak` against `strong`.
CompareReport compare(const FieldTrajectory& weak, const FieldTrajectory& strong, const LabConfig& c);
nlohmann::json compare_json(const CompareReport& r);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace lowmach
