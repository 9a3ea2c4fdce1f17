#pragma once

// Staggered-grid kernels shared by the compressible and Boussinesq solvers.
// Velocity component a lives on faces normal to axis a; walls are no-slip,
// enforced through zero wall-normal faces and mirrored ghost values for the
// tangential components.

#include <vector>

#include "lowmach/grid.hpp"
#include "lowmach/thermo.hpp"

namespace lowmach::mac {

/// div S at interior faces, S = mu (grad u + grad u^T) + lambda (div u) I.
/// mu and lambda are cell fields; mu on edges is the mean of adjacent cells.
void stress_divergence(const FaceField& u, const CellField& mu, const CellField& lambda,
                       FaceField& out);

/// (u . grad) u_a at interior faces: central differences with an added
/// |u_b| (u+ - 2u + u-) / (2h) dissipation scaled by `upwind` in [0, 1].
void advect_velocity(const FaceField& u, double upwind, FaceField& out);

/// (p_i - p_{i-1}) / h on interior faces; wall faces are set to zero.
void cell_gradient(const CellField& p, FaceField& out);

/// Velocity gradient g[a][b] = d u_a / d x_b at a cell centre.
thermo::Tensor cell_velocity_gradient(const FaceField& u, int i, int j, int k);

/// The same gradient at every cell, in cell index order.
void cell_velocity_gradients(const FaceField& u, std::vector<thermo::Tensor>& out);

/// Sets every wall-normal face to zero.
void zero_walls(FaceField& u);

/// Mean of the face component over the two faces bounding each cell,
/// then the max over cells of the magnitude.
double max_cell_speed(const FaceField& u);

}  // namespace lowmach::mac
