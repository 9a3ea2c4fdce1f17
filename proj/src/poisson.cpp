#include "lowmach/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

#include "lowmach/errors.hpp"

namespace lowmach {

struct NeumannPoisson::Plans {
  double* buf = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (buf) fftw_free(buf);
  }
};

NeumannPoisson::NeumannPoisson(const Grid& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  const std::size_t n = grid.cells();
  plans_->buf = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  // FFTW wants the slowest index first.
  int dims[3];
  fftw_r2r_kind fwd[3], bwd[3];
  for (int a = 0; a < grid.dim; ++a) {
    dims[a] = grid.n[grid.dim - 1 - a];
    fwd[a] = FFTW_REDFT10;
    bwd[a] = FFTW_REDFT01;
  }
  plans_->forward = fftw_plan_r2r(grid.dim, dims, plans_->buf, plans_->buf, fwd, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_r2r(grid.dim, dims, plans_->buf, plans_->buf, bwd, FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) throw SolverError("FFTW plan creation failed");

  inv_eig_.assign(n, 0.0);
  double norm = 1.0;
  for (int a = 0; a < grid.dim; ++a) norm *= 2.0 * grid.n[a];
  const double h2 = grid.h * grid.h;
  for (int k = 0; k < grid.n[2]; ++k)
    for (int j = 0; j < grid.n[1]; ++j)
      for (int i = 0; i < grid.n[0]; ++i) {
        const int idx[3] = {i, j, k};
        double lam = 0.0;
        for (int a = 0; a < grid.dim; ++a)
          lam += (2.0 - 2.0 * std::cos(std::numbers::pi * idx[a] / grid.n[a])) / h2;
        // Eigenvalue of -lap; the constant mode is left at zero.
        inv_eig_[grid.index(i, j, k)] = lam > 0.0 ? -1.0 / (lam * norm) : 0.0;
      }
}

NeumannPoisson::~NeumannPoisson() = default;

void NeumannPoisson::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const Grid& g = grid_;
  const double ih2 = 1.0 / (g.h * g.h);
  const std::size_t step[3] = {1, static_cast<std::size_t>(g.n[0]),
                               static_cast<std::size_t>(g.n[0]) * g.n[1]};
  y.assign(x.size(), 0.0);
#pragma omp parallel for collapse(2) if (g.cells() > 65536)
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t c = g.index(i, j, k);
        const int pos[3] = {i, j, k};
        double s = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          if (pos[a] > 0) s += x[c - step[a]] - x[c];
          if (pos[a] < g.n[a] - 1) s += x[c + step[a]] - x[c];
        }
        y[c] = s * ih2;
      }
}

void NeumannPoisson::precondition(const std::vector<double>& r, std::vector<double>& z) {
  const std::size_t n = r.size();
  std::copy(r.begin(), r.end(), plans_->buf);
  fftw_execute(plans_->forward);
  for (std::size_t c = 0; c < n; ++c) plans_->buf[c] *= inv_eig_[c];
  fftw_execute(plans_->backward);
  z.assign(plans_->buf, plans_->buf + n);
}

PoissonStats NeumannPoisson::solve(const CellField& rhs, CellField& x, double tol, int max_iter) {
  if (!rhs.grid.same_shape(grid_)) throw ShapeError("Poisson right-hand side on a different grid");
  const std::size_t n = grid_.cells();
  std::vector<double> b = rhs.values;
  double mean = 0.0;
  for (double v : b) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : b) v -= mean;
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);

  x = CellField(grid_);
  PoissonStats st;
  if (bnorm == 0.0) return st;

  // Preconditioned CG on -lap, which is positive semidefinite.
  std::vector<double> r(n), z(n), p(n), ap(n);
  for (std::size_t c = 0; c < n; ++c) r[c] = -b[c];
  precondition(r, z);
  for (double& v : z) v = -v;
  p = z;
  double rz = 0.0;
  for (std::size_t c = 0; c < n; ++c) rz += r[c] * z[c];
  std::vector<double>& xv = x.values;
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      ap[c] = -ap[c];
      pap += p[c] * ap[c];
    }
    const double a = rz / pap;
    double rr = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      xv[c] += a * p[c];
      r[c] -= a * ap[c];
      rr += r[c] * r[c];
    }
    st.iterations = it;
    st.relative_residual = std::sqrt(rr) / bnorm;
    if (st.relative_residual <= tol) break;
    precondition(r, z);
    for (double& v : z) v = -v;
    double rz_new = 0.0;
    for (std::size_t c = 0; c < n; ++c) rz_new += r[c] * z[c];
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t c = 0; c < n; ++c) p[c] = z[c] + beta * p[c];
  }
  if (st.relative_residual > tol) throw SolverError("pressure Poisson solve did not converge");
  double xm = 0.0;
  for (double v : xv) xm += v;
  xm /= static_cast<double>(n);
  for (double& v : xv) v -= xm;
  return st;
}

}  // namespace lowmach
