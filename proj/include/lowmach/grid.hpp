#pragma once

// Uniform structured grids over boxes [origin, origin + n*h] in 2 or 3
// dimensions, with cell-, face- (MAC staggered) and node-located storage.
//
// Storage is row-major with x fastest: index = i + n0 * (j + n1 * k).
// In two dimensions the third extent is 1 and never differentiated.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lowmach {

using Index3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

struct Grid {
  int dim = 2;
  Index3 n{1, 1, 1};
  double h = 1.0;
  Vec3 origin{0.0, 0.0, 0.0};

  /// Square/cubic grid with `cells` cells per side covering [0, length]^dim.
  static Grid uniform(int dim, int cells, double length = 1.0);

  std::size_t cells() const {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }
  std::size_t index(int i, int j, int k = 0) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n[0]) * (static_cast<std::size_t>(j) +
                                             static_cast<std::size_t>(n[1]) * k);
  }
  double cell_volume() const;
  double length(int axis) const { return n[axis] * h; }
  double volume() const;
  double cell_center(int axis, int i) const { return origin[axis] + (i + 0.5) * h; }
  Vec3 cell_center(int i, int j, int k) const;

  /// Extents of the face array normal to `axis` (one extra layer along axis).
  Index3 face_dims(int axis) const {
    Index3 d = n;
    d[axis] += 1;
    return d;
  }
  std::size_t faces(int axis) const;
  std::size_t face_index(int axis, int i, int j, int k = 0) const {
    const std::size_t d0 = static_cast<std::size_t>(n[0]) + (axis == 0);
    const std::size_t d1 = static_cast<std::size_t>(n[1]) + (axis == 1);
    return static_cast<std::size_t>(i) + d0 * (static_cast<std::size_t>(j) + d1 * k);
  }
  /// Physical coordinate of face (i,j,k) normal to axis.
  Vec3 face_center(int axis, int i, int j, int k) const;

  Index3 node_dims() const;
  std::size_t nodes() const;
  std::size_t node_index(int i, int j, int k = 0) const;
  Vec3 node_position(int i, int j, int k) const;

  bool same_shape(const Grid& other) const;
};

/// Cell-centred scalar.
struct CellField {
  Grid grid;
  std::vector<double> values;

  CellField() = default;
  explicit CellField(const Grid& g, double fill = 0.0) : grid(g), values(g.cells(), fill) {}

  double& operator()(int i, int j, int k = 0) { return values[grid.index(i, j, k)]; }
  double operator()(int i, int j, int k = 0) const { return values[grid.index(i, j, k)]; }
};

/// Staggered (MAC) vector: component a lives on faces normal to axis a.
struct FaceField {
  Grid grid;
  std::array<std::vector<double>, 3> comp;

  FaceField() = default;
  explicit FaceField(const Grid& g, double fill = 0.0);

  double& at(int axis, int i, int j, int k = 0) {
    return comp[axis][grid.face_index(axis, i, j, k)];
  }
  double at(int axis, int i, int j, int k = 0) const {
    return comp[axis][grid.face_index(axis, i, j, k)];
  }
};

/// Node-located scalar (stream functions).
struct NodeField {
  Grid grid;
  std::vector<double> values;

  NodeField() = default;
  explicit NodeField(const Grid& g, double fill = 0.0) : grid(g), values(g.nodes(), fill) {}

  double& operator()(int i, int j, int k = 0) { return values[grid.node_index(i, j, k)]; }
  double operator()(int i, int j, int k = 0) const { return values[grid.node_index(i, j, k)]; }
};

/// Per-cell byte mask.
using CellMask = std::vector<std::uint8_t>;

// Field arithmetic used by diagnostics.
double integrate(const CellField& f);
double l2_norm(const CellField& f);
double max_abs(const CellField& f);
double l2_norm(const FaceField& f);
double max_abs(const FaceField& f);
bool all_finite(const CellField& f);
bool all_finite(const FaceField& f);

/// Discrete divergence of a MAC field, located at cell centres.
CellField divergence(const FaceField& u);

/// Face velocities averaged to cell centres, component `axis`.
CellField face_to_cell(const FaceField& u, int axis);

// ---------------------------------------------------------------------------
// Raw dumps: an 80-byte ASCII header (tag, dtype, extents, spacing, origin;
// space padded, newline terminated) followed by row-major little-endian data.

struct RawHeader {
  std::string tag;    // LMFIELD, LMMASK, ...
  std::string dtype;  // f64 or u8
  Index3 dims{1, 1, 1};
  double h = 1.0;
  Vec3 origin{0.0, 0.0, 0.0};
};

inline constexpr std::size_t kRawHeaderBytes = 80;

std::string format_raw_header(const RawHeader& header);
RawHeader parse_raw_header(const std::string& text);

void write_raw(const std::string& path, const RawHeader& header, const void* data,
               std::size_t bytes);
/// Reads a dump and returns its payload; throws ShapeError on size mismatch.
std::vector<char> read_raw(const std::string& path, RawHeader& header);

void write_cell_field(const std::string& path, const CellField& f);
CellField read_cell_field(const std::string& path, int dim);
void write_face_component(const std::string& path, const FaceField& u, int axis);
void read_face_component(const std::string& path, FaceField& u, int axis);
void write_mask(const std::string& path, const Grid& grid, const CellMask& mask);
CellMask read_mask(const std::string& path, RawHeader& header);

}  // namespace lowmach
