#pragma once

// Cell-centred Poisson problems with homogeneous Neumann walls. The
// discrete operator is the standard (2d+1)-point Laplacian with mirrored
// ghost cells; its eigenvectors are products of DCT-II modes, so FFTW's
// real-to-real transforms invert it exactly. Conjugate gradients with that
// inverse as preconditioner supply the residual control.

#include <memory>

#include "lowmach/grid.hpp"

namespace lowmach {

struct PoissonStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

class NeumannPoisson {
 public:
  explicit NeumannPoisson(const Grid& grid);
  ~NeumannPoisson();
  NeumannPoisson(const NeumannPoisson&) = delete;
  NeumannPoisson& operator=(const NeumannPoisson&) = delete;

  /// Solves lap(x) = rhs for the mean-zero x. The mean of rhs is removed
  /// first (the compatibility condition). Throws SolverError if the relative
  /// residual does not reach `tol` within `max_iter` iterations.
  PoissonStats solve(const CellField& rhs, CellField& x, double tol = 1e-10, int max_iter = 50);

  /// y = lap(x) with Neumann walls.
  void apply(const std::vector<double>& x, std::vector<double>& y) const;

  const Grid& grid() const { return grid_; }

 private:
  void precondition(const std::vector<double>& r, std::vector<double>& z);

  Grid grid_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::vector<double> inv_eig_;
};

}  // namespace lowmach
