#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lowmach/geometry.hpp"
#include "lowmach/grid.hpp"
#include "lowmach/thermo.hpp"

namespace lowmach {

// ---------------------------------------------------------------------------
// Extension

struct ExtensionStats {
  int components = 0;
  int max_iterations = 0;
  double max_residual = 0.0;
};

/// Connected components (face adjacency) of the cells marked kHole.
std::vector<std::vector<std::size_t>> hole_components(const Grid& grid, const CellMask& mask);

/// Replaces the values on hole cells by the discrete harmonic extension of
/// the surrounding data; values elsewhere are copied unchanged. Each hole
/// component is solved independently by conjugate gradients.
CellField extend(const CellField& field, const CellMask& mask, ExtensionStats* stats = nullptr,
                 double tol = 1e-13);

/// ||f||_{W^{1,2}} restricted to cells with region[i] != 0. Gradients use only
/// faces whose two cells both lie in the region.
double w12_norm(const CellField& f, const std::vector<std::uint8_t>& region);
double w12_norm(const CellField& f);

/// Same norm for a staggered field: faces of each component are treated as
/// a scalar grid of their own.
double w12_norm(const FaceField& u);

/// region[i] = 1 on every cell that is not a hole.
std::vector<std::uint8_t> fluid_region(const CellMask& mask);

// ---------------------------------------------------------------------------
// Restriction (two dimensions, divergence-free input given by a stream function)

/// u = d psi / dy on x-faces, v = -d psi / dx on y-faces, from node values.
FaceField perp_gradient(const NodeField& psi);

/// Samples an analytic function on the nodes of `grid`.
NodeField sample_nodes(const Grid& grid, const std::function<double(double, double)>& f);

/// A divergence-free field, optionally carrying the stream function it came from.
struct SolenoidalField {
  FaceField velocity;
  std::optional<NodeField> stream;
};

SolenoidalField from_stream(const NodeField& psi);

struct RestrictionResult {
  FaceField velocity;
  NodeField stream;
};

/// psi_eps = psi - phi_n (psi - psi(x_n)) near hole n, returned together
/// with its perpendicular gradient. `psi_at` supplies psi at hole centres;
/// when absent it is interpolated bilinearly from the node values.
RestrictionResult restrict_stream(const NodeField& psi, const PerforatedGeometry& geom,
                                  const std::function<double(double, double)>& psi_at = {});

/// Throws UnsupportedInputError if the field carries no stream function or
/// the grid is not two dimensional.
FaceField restrict_field(const SolenoidalField& phi, const PerforatedGeometry& geom);

// ---------------------------------------------------------------------------
// Essential / residual split

enum SplitClass : std::uint8_t { kEssential = 0, kResidual = 1, kHoleSet = 2 };

struct EssResSplit {
  CellMask classes;
  double measure_ess = 0.0;
  double measure_res = 0.0;
  double measure_holes = 0.0;
};

EssResSplit ess_res_split(const CellField& rho, const CellField& theta, const CellMask& mask,
                          const thermo::ThermoParams& params);

// ---------------------------------------------------------------------------
// First-order perturbations

struct PerturbationFields {
  CellField rho1;    // zero on holes
  CellField theta1;  // harmonically extended into holes
  CellField ell1;    // log temperature, extended
  CellField p1;      // zero on holes
  CellField s1;      // zero on holes
  CellField kappa1;  // zero on holes
};

PerturbationFields perturbation_fields(const CellField& rho, const CellField& theta,
                                       const CellMask& mask, const thermo::ThermoParams& params,
                                       double mach);

}  // namespace lowmach
