#include "lowmach/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lowmach/errors.hpp"

namespace lowmach {

Grid Grid::uniform(int dim, int cells, double length) {
  if (dim != 2 && dim != 3) throw ConfigError("grid dimension must be 2 or 3");
  if (cells < 1 || !(length > 0.0)) throw ConfigError("grid needs cells >= 1 and length > 0");
  Grid g;
  g.dim = dim;
  g.n = {cells, cells, dim == 3 ? cells : 1};
  g.h = length / cells;
  return g;
}

double Grid::cell_volume() const { return std::pow(h, dim); }

double Grid::volume() const { return static_cast<double>(cells()) * cell_volume(); }

Vec3 Grid::cell_center(int i, int j, int k) const {
  return {cell_center(0, i), cell_center(1, j), dim == 3 ? cell_center(2, k) : 0.0};
}

std::size_t Grid::faces(int axis) const {
  if (axis >= dim) return 0;
  const Index3 d = face_dims(axis);
  return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

Vec3 Grid::face_center(int axis, int i, int j, int k) const {
  Vec3 x = cell_center(i, j, k);
  const Index3 idx{i, j, k};
  x[axis] = origin[axis] + idx[axis] * h;
  return x;
}

Index3 Grid::node_dims() const {
  return {n[0] + 1, n[1] + 1, dim == 3 ? n[2] + 1 : 1};
}

std::size_t Grid::nodes() const {
  const Index3 d = node_dims();
  return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

std::size_t Grid::node_index(int i, int j, int k) const {
  const Index3 d = node_dims();
  return static_cast<std::size_t>(i) +
         static_cast<std::size_t>(d[0]) *
             (static_cast<std::size_t>(j) + static_cast<std::size_t>(d[1]) * k);
}

Vec3 Grid::node_position(int i, int j, int k) const {
  return {origin[0] + i * h, origin[1] + j * h, dim == 3 ? origin[2] + k * h : 0.0};
}

bool Grid::same_shape(const Grid& other) const {
  return dim == other.dim && n == other.n && std::abs(h - other.h) <= 1e-14 * h &&
         std::abs(origin[0] - other.origin[0]) <= 1e-14 &&
         std::abs(origin[1] - other.origin[1]) <= 1e-14 &&
         std::abs(origin[2] - other.origin[2]) <= 1e-14;
}

FaceField::FaceField(const Grid& g, double fill) : grid(g) {
  for (int a = 0; a < g.dim; ++a) comp[a].assign(g.faces(a), fill);
}

double integrate(const CellField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double l2_norm(const CellField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.cell_volume());
}

double max_abs(const CellField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(const FaceField& f) {
  double s = 0.0;
  for (int a = 0; a < f.grid.dim; ++a)
    for (double v : f.comp[a]) s += v * v;
  return std::sqrt(s * f.grid.cell_volume());
}

double max_abs(const FaceField& f) {
  double m = 0.0;
  for (int a = 0; a < f.grid.dim; ++a)
    for (double v : f.comp[a]) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const CellField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const FaceField& f) {
  for (int a = 0; a < f.grid.dim; ++a)
    for (double v : f.comp[a])
      if (!std::isfinite(v)) return false;
  return true;
}

CellField divergence(const FaceField& u) {
  const Grid& g = u.grid;
  CellField div(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        double s = (u.at(0, i + 1, j, k) - u.at(0, i, j, k)) + (u.at(1, i, j + 1, k) - u.at(1, i, j, k));
        if (g.dim == 3) s += u.at(2, i, j, k + 1) - u.at(2, i, j, k);
        div(i, j, k) = s / g.h;
      }
  return div;
}

CellField face_to_cell(const FaceField& u, int axis) {
  const Grid& g = u.grid;
  CellField c(g);
  const int di = axis == 0, dj = axis == 1, dk = axis == 2;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        c(i, j, k) = 0.5 * (u.at(axis, i, j, k) + u.at(axis, i + di, j + dj, k + dk));
  return c;
}

// ---------------------------------------------------------------------------

std::string format_raw_header(const RawHeader& hd) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s dims=%d,%d,%d h=%.17g origin=%.17g,%.17g,%.17g",
                hd.tag.c_str(), hd.dtype.c_str(), hd.dims[0], hd.dims[1], hd.dims[2], hd.h,
                hd.origin[0], hd.origin[1], hd.origin[2]);
  std::string s(buf);
  if (s.size() > kRawHeaderBytes - 1) {
    // Shorter origin representation keeps the header inside 80 bytes.
    std::snprintf(buf, sizeof buf, "%s %s dims=%d,%d,%d h=%.17g origin=%.9g,%.9g,%.9g",
                  hd.tag.c_str(), hd.dtype.c_str(), hd.dims[0], hd.dims[1], hd.dims[2], hd.h,
                  hd.origin[0], hd.origin[1], hd.origin[2]);
    s = buf;
  }
  if (s.size() > kRawHeaderBytes - 1) throw ShapeError("raw header exceeds 80 bytes: " + s);
  s.resize(kRawHeaderBytes - 1, ' ');
  s.push_back('\n');
  return s;
}

RawHeader parse_raw_header(const std::string& text) {
  RawHeader hd;
  std::istringstream in(text);
  std::string tok;
  in >> hd.tag >> hd.dtype;
  while (in >> tok) {
    if (tok.rfind("dims=", 0) == 0) {
      if (std::sscanf(tok.c_str() + 5, "%d,%d,%d", &hd.dims[0], &hd.dims[1], &hd.dims[2]) != 3)
        throw ShapeError("malformed dims in raw header");
    } else if (tok.rfind("h=", 0) == 0) {
      hd.h = std::stod(tok.substr(2));
    } else if (tok.rfind("origin=", 0) == 0) {
      if (std::sscanf(tok.c_str() + 7, "%lf,%lf,%lf", &hd.origin[0], &hd.origin[1],
                      &hd.origin[2]) != 3)
        throw ShapeError("malformed origin in raw header");
    }
  }
  if (hd.tag.empty() || hd.dtype.empty()) throw ShapeError("empty raw header");
  return hd;
}

void write_raw(const std::string& path, const RawHeader& header, const void* data,
               std::size_t bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  const std::string head = format_raw_header(header);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw ConfigError("write failed: " + path);
}

std::vector<char> read_raw(const std::string& path, RawHeader& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::string head(kRawHeaderBytes, '\0');
  in.read(head.data(), static_cast<std::streamsize>(kRawHeaderBytes));
  if (in.gcount() != static_cast<std::streamsize>(kRawHeaderBytes))
    throw ShapeError("truncated raw header: " + path);
  header = parse_raw_header(head);
  const std::size_t count = static_cast<std::size_t>(header.dims[0]) * header.dims[1] * header.dims[2];
  const std::size_t width = header.dtype == "f64" ? 8 : header.dtype == "u8" ? 1 : 0;
  if (width == 0) throw ShapeError("unknown dtype " + header.dtype);
  std::vector<char> payload(count * width);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size())
    throw ShapeError("raw payload size mismatch: " + path);
  return payload;
}

namespace {

Grid grid_from_header(const RawHeader& hd, int dim, const Index3& extra) {
  Grid g;
  g.dim = dim;
  for (int a = 0; a < 3; ++a) g.n[a] = hd.dims[a] - extra[a];
  g.h = hd.h;
  g.origin = hd.origin;
  return g;
}

}  // namespace

void write_cell_field(const std::string& path, const CellField& f) {
  RawHeader hd{"LMFIELD", "f64", f.grid.n, f.grid.h, f.grid.origin};
  write_raw(path, hd, f.values.data(), f.values.size() * sizeof(double));
}

CellField read_cell_field(const std::string& path, int dim) {
  RawHeader hd;
  auto payload = read_raw(path, hd);
  if (hd.dtype != "f64") throw ShapeError("expected f64 field in " + path);
  CellField f(grid_from_header(hd, dim, {0, 0, 0}));
  std::memcpy(f.values.data(), payload.data(), payload.size());
  return f;
}

void write_face_component(const std::string& path, const FaceField& u, int axis) {
  RawHeader hd{"LMFACE" + std::to_string(axis), "f64", u.grid.face_dims(axis), u.grid.h,
               u.grid.origin};
  write_raw(path, hd, u.comp[axis].data(), u.comp[axis].size() * sizeof(double));
}

void read_face_component(const std::string& path, FaceField& u, int axis) {
  RawHeader hd;
  auto payload = read_raw(path, hd);
  if (hd.dims != u.grid.face_dims(axis)) throw ShapeError("face dump extents mismatch: " + path);
  u.comp[axis].resize(u.grid.faces(axis));
  std::memcpy(u.comp[axis].data(), payload.data(), payload.size());
}

void write_mask(const std::string& path, const Grid& grid, const CellMask& mask) {
  if (mask.size() != grid.cells()) throw ShapeError("mask size does not match grid");
  RawHeader hd{"LMMASK", "u8", grid.n, grid.h, grid.origin};
  write_raw(path, hd, mask.data(), mask.size());
}

CellMask read_mask(const std::string& path, RawHeader& header) {
  auto payload = read_raw(path, header);
  if (header.dtype != "u8") throw ShapeError("expected u8 mask in " + path);
  return CellMask(payload.begin(), payload.end());
}

}  // namespace lowmach
