#include "lowmach/mac.hpp"

#include <cmath>
#include <vector>

namespace lowmach::mac {

namespace {

inline std::size_t lin(const Index3& d, int i, int j, int k) {
  return static_cast<std::size_t>(i) +
         static_cast<std::size_t>(d[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(d[1]) * k);
}

// u_a at face position p (a-index is a face index, others are cell indices),
// with the mirrored ghost value outside the walls in tangential directions.
inline double face_value(const FaceField& u, int a, Index3 p) {
  const Grid& g = u.grid;
  double sign = 1.0;
  for (int b = 0; b < g.dim; ++b) {
    if (b == a) continue;
    if (p[b] < 0) {
      p[b] = 0;
      sign = -sign;
    } else if (p[b] >= g.n[b]) {
      p[b] = g.n[b] - 1;
      sign = -sign;
    }
  }
  return sign * u.comp[a][g.face_index(a, p[0], p[1], p[2])];
}

}  // namespace

void zero_walls(FaceField& u) {
  const Grid& g = u.grid;
  for (int a = 0; a < g.dim; ++a) {
    const Index3 d = g.face_dims(a);
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          const int pa = a == 0 ? i : a == 1 ? j : k;
          if (pa == 0 || pa == g.n[a]) u.comp[a][lin(d, i, j, k)] = 0.0;
        }
  }
}

namespace {

struct Strides {
  std::size_t s[3];
};

inline Strides strides(const Index3& d) {
  return {{1, static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[0]) * d[1]}};
}

}  // namespace

void stress_divergence(const FaceField& u, const CellField& mu, const CellField& lambda,
                       FaceField& out) {
  const Grid& g = u.grid;
  const int dim = g.dim;
  const double ih = 1.0 / g.h;
  out = FaceField(g);
  const Strides cs = strides(g.n);

  // Diagonal stresses at cell centres.
  std::vector<double> diag[3];
  for (int a = 0; a < dim; ++a) diag[a].assign(g.cells(), 0.0);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t c = g.index(i, j, k);
        double d[3] = {0, 0, 0}, div = 0.0;
        for (int a = 0; a < dim; ++a) {
          const std::size_t f = g.face_index(a, i, j, k);
          d[a] = (u.comp[a][f + strides(g.face_dims(a)).s[a]] - u.comp[a][f]) * ih;
          div += d[a];
        }
        for (int a = 0; a < dim; ++a) diag[a][c] = 2.0 * mu.values[c] * d[a] + lambda.values[c] * div;
      }

  for (int a = 0; a < dim; ++a) {
    const Index3 fd = g.face_dims(a);
    for (int k = 0; k < fd[2]; ++k)
      for (int j = 0; j < fd[1]; ++j)
        for (int i = 0; i < fd[0]; ++i) {
          const Index3 p{i, j, k};
          if (p[a] == 0 || p[a] == g.n[a]) continue;
          const std::size_t c = g.index(i, j, k);
          out.comp[a][lin(fd, i, j, k)] = (diag[a][c] - diag[a][c - cs.s[a]]) * ih;
        }
  }

  // Off-diagonal stresses on edges (nodes in 2D) for each axis pair. Edge e
  // sits between cells e-1 and e along both a and b.
  std::vector<double> tau;
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) {
      Index3 ed = g.n;
      ed[a] += 1;
      ed[b] += 1;
      const Strides es = strides(ed);
      const Index3 da = g.face_dims(a), db = g.face_dims(b);
      const Strides as = strides(da), bs = strides(db);
      tau.assign(static_cast<std::size_t>(ed[0]) * ed[1] * ed[2], 0.0);
      for (int k = 0; k < ed[2]; ++k)
        for (int j = 0; j < ed[1]; ++j)
          for (int i = 0; i < ed[0]; ++i) {
            const Index3 e{i, j, k};
            // Wall-normal faces carry zero velocity, and on wall edges the
            // mirrored tangential ghost doubles the one-sided value.
            double dua = 0.0, dub = 0.0;
            if (e[a] > 0 && e[a] < g.n[a]) {
              Index3 q = e;
              const bool lo_in = e[b] > 0, hi_in = e[b] < g.n[b];
              if (!hi_in) q[b] -= 1;
              const std::size_t f = lin(da, q[0], q[1], q[2]);
              const double hi = hi_in ? u.comp[a][f] : -u.comp[a][f];
              const double lo = lo_in ? (hi_in ? u.comp[a][f - as.s[b]] : u.comp[a][f]) : -u.comp[a][f];
              dua = (hi - lo) * ih;
            }
            if (e[b] > 0 && e[b] < g.n[b]) {
              Index3 q = e;
              const bool lo_in = e[a] > 0, hi_in = e[a] < g.n[a];
              if (!hi_in) q[a] -= 1;
              const std::size_t f = lin(db, q[0], q[1], q[2]);
              const double hi = hi_in ? u.comp[b][f] : -u.comp[b][f];
              const double lo = lo_in ? (hi_in ? u.comp[b][f - bs.s[a]] : u.comp[b][f]) : -u.comp[b][f];
              dub = (hi - lo) * ih;
            }
            if (dua == 0.0 && dub == 0.0) continue;
            double ms = 0.0;
            int mc = 0;
            for (int sa = -1; sa <= 0; ++sa)
              for (int sb = -1; sb <= 0; ++sb) {
                Index3 c = e;
                c[a] += sa;
                c[b] += sb;
                if (c[a] < 0 || c[a] >= g.n[a] || c[b] < 0 || c[b] >= g.n[b]) continue;
                ms += mu.values[g.index(c[0], c[1], c[2])];
                ++mc;
              }
            tau[lin(ed, i, j, k)] = (ms / mc) * (dua + dub);
          }
      // d tau_ab / d x_b contributes to u_a, d tau_ab / d x_a to u_b.
      for (int comp : {a, b}) {
        const int other = comp == a ? b : a;
        const Index3 fd = g.face_dims(comp);
        for (int k = 0; k < fd[2]; ++k)
          for (int j = 0; j < fd[1]; ++j)
            for (int i = 0; i < fd[0]; ++i) {
              const Index3 p{i, j, k};
              if (p[comp] == 0 || p[comp] == g.n[comp]) continue;
              const std::size_t e0 = lin(ed, i, j, k);
              out.comp[comp][lin(fd, i, j, k)] += (tau[e0 + es.s[other]] - tau[e0]) * ih;
            }
      }
    }
}

void advect_velocity(const FaceField& u, double upwind, FaceField& out) {
  const Grid& g = u.grid;
  const int dim = g.dim;
  const double hh = 0.5 / g.h;
  out = FaceField(g);
  for (int a = 0; a < dim; ++a) {
    const Index3 fd = g.face_dims(a);
    const Strides as = strides(fd);
    Strides bstr[3];
    for (int b = 0; b < dim; ++b) bstr[b] = strides(g.face_dims(b));
    const double* ua = u.comp[a].data();
#pragma omp parallel for collapse(2) if (g.cells() > 65536)
    for (int k = 0; k < fd[2]; ++k)
      for (int j = 0; j < fd[1]; ++j)
        for (int i = 0; i < fd[0]; ++i) {
          const Index3 p{i, j, k};
          if (p[a] == 0 || p[a] == g.n[a]) continue;
          const std::size_t f = lin(fd, i, j, k);
          const double c0 = ua[f];
          double s = 0.0;
          for (int b = 0; b < dim; ++b) {
            double vb, cp, cm;
            if (b == a) {
              vb = c0;
              cp = ua[f + as.s[a]];
              cm = ua[f - as.s[a]];
            } else {
              // Mean of the four u_b faces around this u_a face.
              const double* ub = u.comp[b].data();
              const std::size_t q = lin(g.face_dims(b), i, j, k);
              const std::size_t sa = bstr[b].s[a], sb = bstr[b].s[b];
              vb = 0.25 * (ub[q] + ub[q + sb] + ub[q - sa] + ub[q - sa + sb]);
              cp = p[b] < g.n[b] - 1 ? ua[f + as.s[b]] : -c0;
              cm = p[b] > 0 ? ua[f - as.s[b]] : -c0;
            }
            s += vb * (cp - cm) * hh - upwind * std::abs(vb) * (cp - 2.0 * c0 + cm) * hh;
          }
          out.comp[a][f] = s;
        }
  }
}

void cell_gradient(const CellField& p, FaceField& out) {
  const Grid& g = p.grid;
  out = FaceField(g);
  const double ih = 1.0 / g.h;
  for (int a = 0; a < g.dim; ++a) {
    const Index3 fd = g.face_dims(a);
    for (int k = 0; k < fd[2]; ++k)
      for (int j = 0; j < fd[1]; ++j)
        for (int i = 0; i < fd[0]; ++i) {
          const Index3 q{i, j, k};
          if (q[a] == 0 || q[a] == g.n[a]) continue;
          Index3 lo = q;
          lo[a] -= 1;
          out.comp[a][lin(fd, i, j, k)] = (p(i, j, k) - p(lo[0], lo[1], lo[2])) * ih;
        }
  }
}

thermo::Tensor cell_velocity_gradient(const FaceField& u, int i, int j, int k) {
  const Grid& g = u.grid;
  const double ih = 1.0 / g.h;
  thermo::Tensor t{};
  const Index3 p{i, j, k};
  auto centre = [&](int a, Index3 c) {
    // Cell-centred u_a with the no-slip mirror outside the walls.
    double sign = 1.0;
    for (int b = 0; b < g.dim; ++b) {
      if (c[b] < 0) {
        c[b] = 0;
        sign = -sign;
      } else if (c[b] >= g.n[b]) {
        c[b] = g.n[b] - 1;
        sign = -sign;
      }
    }
    Index3 hi = c;
    hi[a] += 1;
    return sign * 0.5 * (u.at(a, c[0], c[1], c[2]) + u.at(a, hi[0], hi[1], hi[2]));
  };
  for (int a = 0; a < g.dim; ++a)
    for (int b = 0; b < g.dim; ++b) {
      if (a == b) {
        Index3 hi = p;
        hi[a] += 1;
        t[a][a] = (u.at(a, hi[0], hi[1], hi[2]) - u.at(a, i, j, k)) * ih;
      } else {
        Index3 up = p, dn = p;
        up[b] += 1;
        dn[b] -= 1;
        t[a][b] = (centre(a, up) - centre(a, dn)) * 0.5 * ih;
      }
    }
  return t;
}

void cell_velocity_gradients(const FaceField& u, std::vector<thermo::Tensor>& out) {
  const Grid& g = u.grid;
  const int dim = g.dim;
  const double ih = 1.0 / g.h;
  const std::size_t nc = g.cells();
  const Strides cs = strides(g.n);
  std::vector<double> uc[3];
  for (int a = 0; a < dim; ++a) {
    uc[a].resize(nc);
    const Index3 fd = g.face_dims(a);
    const std::size_t sa = strides(fd).s[a];
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i) {
          const std::size_t f = lin(fd, i, j, k);
          uc[a][g.index(i, j, k)] = 0.5 * (u.comp[a][f] + u.comp[a][f + sa]);
        }
  }
  out.assign(nc, thermo::Tensor{});
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Index3 p{i, j, k};
        const std::size_t c = g.index(i, j, k);
        thermo::Tensor& t = out[c];
        for (int a = 0; a < dim; ++a) {
          const Index3 fd = g.face_dims(a);
          const std::size_t f = lin(fd, i, j, k);
          t[a][a] = (u.comp[a][f + strides(fd).s[a]] - u.comp[a][f]) * ih;
          for (int b = 0; b < dim; ++b) {
            if (b == a) continue;
            // No-slip mirror: the ghost centre value is minus the interior one.
            const double up = p[b] < g.n[b] - 1 ? uc[a][c + cs.s[b]] : -uc[a][c];
            const double dn = p[b] > 0 ? uc[a][c - cs.s[b]] : -uc[a][c];
            t[a][b] = (up - dn) * 0.5 * ih;
          }
        }
      }
}

double max_cell_speed(const FaceField& u) {
  const Grid& g = u.grid;
  double m = 0.0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        double s = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          const int d[3] = {a == 0, a == 1, a == 2};
          const double v = 0.5 * (u.at(a, i, j, k) + u.at(a, i + d[0], j + d[1], k + d[2]));
          s += v * v;
        }
        m = std::max(m, std::sqrt(s));
      }
  return m;
}

}  // namespace lowmach::mac
