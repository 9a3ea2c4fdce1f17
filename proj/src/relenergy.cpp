#include "lowmach/relenergy.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "lowmach/errors.hpp"
#include "lowmach/mac.hpp"

namespace lowmach {

namespace {

void require_same(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": fields live on different grids");
}

// Cell-centred velocity components.
std::array<std::vector<double>, 3> centred(const FaceField& u) {
  std::array<std::vector<double>, 3> c;
  for (int a = 0; a < u.grid.dim; ++a) c[a] = face_to_cell(u, a).values;
  return c;
}

FaceField difference(const FaceField& u, const FaceField& U) {
  FaceField d = u;
  for (int a = 0; a < u.grid.dim; ++a)
    for (std::size_t f = 0; f < d.comp[a].size(); ++f) d.comp[a][f] -= U.comp[a][f];
  return d;
}

// Central cell gradient of a scalar with Neumann (mirrored) walls.
std::vector<Vec3> scalar_gradient(const CellField& f) {
  const Grid& g = f.grid;
  std::vector<Vec3> out(g.cells(), Vec3{0, 0, 0});
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Index3 p{i, j, k};
        const double c = f(i, j, k);
        for (int a = 0; a < g.dim; ++a) {
          Index3 up = p, dn = p;
          up[a] = std::min(p[a] + 1, g.n[a] - 1);
          dn[a] = std::max(p[a] - 1, 0);
          const double vu = up[a] == p[a] ? c : f(up[0], up[1], up[2]);
          const double vd = dn[a] == p[a] ? c : f(dn[0], dn[1], dn[2]);
          out[g.index(i, j, k)][a] = (vu - vd) / (2.0 * g.h);
        }
      }
  return out;
}

// Box average over [i-r, i+r] per axis, clipped, by prefix sums along each axis.
std::vector<double> box_mean(const Grid& g, const std::vector<double>& v, int r) {
  std::vector<double> cur = v, cnt(v.size(), 1.0);
  for (int a = 0; a < g.dim; ++a) {
    std::vector<double> nxt(v.size()), ncnt(v.size());
    const std::size_t stride = a == 0 ? 1 : a == 1 ? g.n[0] : static_cast<std::size_t>(g.n[0]) * g.n[1];
    const int n = g.n[a];
    std::vector<double> ps(n + 1), pc(n + 1);
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i) {
          const Index3 p{i, j, k};
          if (p[a] != 0) continue;
          const std::size_t base = g.index(i, j, k);
          for (int q = 0; q < n; ++q) {
            ps[q + 1] = ps[q] + cur[base + q * stride];
            pc[q + 1] = pc[q] + cnt[base + q * stride];
          }
          for (int q = 0; q < n; ++q) {
            const int lo = std::max(q - r, 0), hi = std::min(q + r, n - 1) + 1;
            nxt[base + q * stride] = ps[hi] - ps[lo];
            ncnt[base + q * stride] = pc[hi] - pc[lo];
          }
        }
    cur.swap(nxt);
    cnt.swap(ncnt);
  }
  for (std::size_t c = 0; c < cur.size(); ++c) cur[c] /= cnt[c];
  return cur;
}

double frobenius(const thermo::Tensor& t, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) s += t[a][b] * t[a][b];
  return std::sqrt(s);
}

}  // namespace

double relative_energy(const FaceField& u, const CellField& theta1, const FaceField& U,
                       const CellField& Theta, const ObCoefficients& c) {
  require_same(u.grid, U.grid, "relative_energy");
  require_same(u.grid, theta1.grid, "relative_energy");
  require_same(u.grid, Theta.grid, "relative_energy");
  const Grid& g = u.grid;
  const auto du = centred(difference(u, U));
  const double wt = c.rho_bar / c.theta_bar * c.c_p;
  double s = 0.0;
  for (std::size_t q = 0; q < g.cells(); ++q) {
    double v2 = 0.0;
    for (int a = 0; a < g.dim; ++a) v2 += du[a][q] * du[a][q];
    const double dt = theta1.values[q] - Theta.values[q];
    s += c.rho_bar * v2 + wt * dt * dt;
  }
  return 0.5 * s * g.cell_volume();
}

DefectProxies defect_proxies(const FaceField& u, double delta, double rho_bar) {
  const Grid& g = u.grid;
  if (!(delta >= 2.0 * g.h * (1.0 - 1e-12)))
    throw ResolutionError("defect proxies need delta >= 2h", delta / 2.0);
  const int r = std::max(1, static_cast<int>(std::floor(delta / (2.0 * g.h) + 1e-9)));
  const int dim = g.dim;
  const auto uc = centred(u);
  std::array<std::vector<double>, 3> m;
  for (int a = 0; a < dim; ++a) m[a] = box_mean(g, uc[a], r);
  DefectProxies d;
  d.delta = delta;
  d.R.assign(g.cells(), thermo::Tensor{});
  d.E = CellField(g);
  std::vector<double> prod(g.cells());
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) {
      for (std::size_t q = 0; q < g.cells(); ++q) prod[q] = uc[a][q] * uc[b][q];
      const std::vector<double> mab = box_mean(g, prod, r);
      for (std::size_t q = 0; q < g.cells(); ++q) {
        const double v = rho_bar * (mab[q] - m[a][q] * m[b][q]);
        d.R[q][a][b] = v;
        d.R[q][b][a] = v;
      }
    }
  for (std::size_t q = 0; q < g.cells(); ++q) {
    double tr = 0.0;
    for (int a = 0; a < dim; ++a) tr += d.R[q][a][a];
    d.E.values[q] = 0.5 * tr;
  }
  return d;
}

double defect_min_eigenvalue(const DefectProxies& d) {
  const int dim = d.E.grid.dim;
  double lo = std::numeric_limits<double>::infinity();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const thermo::Tensor& t : d.R) {
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) m(a, b) = t[a][b];
    if (dim == 2) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.topLeftCorner<2, 2>(), Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
  }
  return lo;
}

double defect_trace_gap(const DefectProxies& d) {
  const int dim = d.E.grid.dim;
  double gap = 0.0;
  for (std::size_t q = 0; q < d.R.size(); ++q) {
    double tr = 0.0;
    for (int a = 0; a < dim; ++a) tr += d.R[q][a][a];
    gap = std::max(gap, std::abs(tr - 2.0 * d.E.values[q]));
  }
  return gap;
}

double max_velocity_gradient(const FaceField& u) {
  std::vector<thermo::Tensor> gr;
  mac::cell_velocity_gradients(u, gr);
  double m = 0.0;
  for (const auto& t : gr) m = std::max(m, frobenius(t, u.grid.dim));
  return m;
}

double gronwall_rate(const FaceField& U, const CellField& Theta, double C0) {
  double mt = 0.0;
  for (const Vec3& v : scalar_gradient(Theta)) mt = std::max(mt, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  return C0 * (max_velocity_gradient(U) + mt);
}

std::vector<ReiSample> rei_residual(const FieldTrajectory& weak, const FieldTrajectory& strong,
                                    const ObCoefficients& c, double delta) {
  if (weak.size() != strong.size() || weak.empty())
    throw AlignmentError("trajectories have different sample counts");
  for (std::size_t s = 0; s < weak.size(); ++s)
    if (std::abs(weak[s].t - strong[s].t) > 1e-12 * std::max(1.0, std::abs(weak[s].t)))
      throw AlignmentError("sample times differ at index " + std::to_string(s));

  const Grid& g = weak.front().u.grid;
  const int dim = g.dim;
  const double vol = g.cell_volume();
  const double wt = c.rho_bar / c.theta_bar * c.c_p;

  // Instantaneous integrands of the dissipation and right-hand side.
  std::vector<double> diss(weak.size()), rhs(weak.size()), rel(weak.size()), def(weak.size());
  for (std::size_t s = 0; s < weak.size(); ++s) {
    const FieldSample& w = weak[s];
    const FieldSample& st = strong[s];
    require_same(w.u.grid, st.u.grid, "rei_residual");
    require_same(w.theta.grid, st.theta.grid, "rei_residual");
    const FaceField du = difference(w.u, st.u);
    CellField dth = w.theta;
    for (std::size_t q = 0; q < dth.values.size(); ++q) dth.values[q] -= st.theta.values[q];
    std::vector<thermo::Tensor> gdu, gU;
    mac::cell_velocity_gradients(du, gdu);
    mac::cell_velocity_gradients(st.u, gU);
    const std::vector<Vec3> gdth = scalar_gradient(dth), gTh = scalar_gradient(st.theta);
    const auto duc = centred(du);
    const DefectProxies dp = defect_proxies(w.u, delta, c.rho_bar);
    double di = 0.0, ri = 0.0, de = 0.0;
    for (std::size_t q = 0; q < g.cells(); ++q) {
      double dd = 0.0, gt = 0.0, conv = 0.0, heat = 0.0, rdef = 0.0;
      for (int a = 0; a < dim; ++a) {
        gt += gdth[q][a] * gdth[q][a];
        heat += gTh[q][a] * duc[a][q];
        for (int b = 0; b < dim; ++b) {
          const double sym = 0.5 * (gdu[q][a][b] + gdu[q][b][a]);
          dd += sym * sym;
          conv += duc[a][q] * duc[b][q] * gU[q][a][b];
          rdef += gU[q][a][b] * dp.R[q][a][b];
        }
      }
      di += 2.0 * c.mu * dd + c.kappa / c.theta_bar * gt;
      ri -= c.rho_bar * conv + wt * dth.values[q] * heat + rdef;
      de += dp.E.values[q];
    }
    diss[s] = di * vol;
    rhs[s] = ri * vol;
    def[s] = de * vol;
    rel[s] = relative_energy(w.u, w.theta, st.u, st.theta, c);
  }

  std::vector<ReiSample> out(weak.size());
  double int_d = 0.0, int_r = 0.0;
  for (std::size_t s = 0; s < weak.size(); ++s) {
    if (s > 0) {
      const double dt = weak[s].t - weak[s - 1].t;
      int_d += 0.5 * dt * (diss[s] + diss[s - 1]);
      int_r += 0.5 * dt * (rhs[s] + rhs[s - 1]);
    }
    ReiSample& o = out[s];
    o.t = weak[s].t;
    o.relative_energy = rel[s];
    o.defect_energy = def[s];
    o.dissipation = int_d;
    o.rhs = int_r;
    o.residual = rel[s] - rel[0] + def[s] + int_d - int_r;
  }
  return out;
}

GronwallReport gronwall_certificate(const std::vector<double>& times, const std::vector<double>& E,
                                    const std::vector<double>& c, double slack) {
  if (times.empty() || times.size() != E.size() || times.size() != c.size())
    throw AlignmentError("Gronwall series must be nonempty and aligned");
  GronwallReport r;
  r.times = times;
  r.E = E;
  r.c = c;
  r.slack = slack;
  r.pass = true;
  r.margin = std::numeric_limits<double>::infinity();
  double integral = 0.0;
  for (std::size_t s = 0; s < times.size(); ++s) {
    if (s > 0) integral += 0.5 * (times[s] - times[s - 1]) * (c[s] + c[s - 1]);
    const double b = (E[0] + slack) * std::exp(integral);
    r.bound.push_back(b);
    r.margin = std::min(r.margin, b - E[s]);
    if (!(E[s] <= b)) r.pass = false;
  }
  return r;
}

double slack_budget(double tolerances, double h, double delta, double rho_bar, double T,
                    double sup_grad_u, double sup_grad_U) {
  const double ratio = delta / h;
  return 10.0 * (tolerances + rho_bar * ratio * ratio / 12.0 * sup_grad_u * sup_grad_u *
                                  (1.0 + T * sup_grad_U) * h * h);
}

}  // namespace lowmach
