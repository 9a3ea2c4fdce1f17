#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "lowmach/errors.hpp"
#include "lowmach/grid.hpp"

using namespace lowmach;

TEST_CASE("grid indexing") {
  Grid g = Grid::uniform(2, 8, 2.0);
  CHECK(g.h == 0.25);
  CHECK(g.cells() == 64);
  CHECK(g.faces(0) == 72);
  CHECK(g.faces(2) == 0);
  CHECK(g.nodes() == 81);
  CHECK(g.cell_center(1, 2, 0)[0] == doctest::Approx(0.375));
  auto fc = g.face_center(0, 3, 1, 0);
  CHECK(fc[0] == doctest::Approx(0.75));
  CHECK(fc[1] == doctest::Approx(0.375));
  CHECK(g.volume() == doctest::Approx(4.0));
  CHECK_THROWS_AS(Grid::uniform(4, 8), ConfigError);
  Grid g3 = Grid::uniform(3, 4);
  CHECK(g3.cells() == 64);
  CHECK(g3.faces(2) == 80);
}

TEST_CASE("divergence of a linear field") {
  Grid g = Grid::uniform(3, 6);
  FaceField u(g);
  for (int a = 0; a < 3; ++a) {
    auto d = g.face_dims(a);
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) u.at(a, i, j, k) = (a + 1) * g.face_center(a, i, j, k)[a];
  }
  auto div = divergence(u);
  for (double v : div.values) CHECK(v == doctest::Approx(6.0));
}

TEST_CASE("raw dump round trip") {
  auto dir = std::filesystem::temp_directory_path() / "lowmach_grid_test";
  std::filesystem::create_directories(dir);
  Grid g = Grid::uniform(2, 5, 1.0);
  g.origin = {0.1, -0.2, 0.0};
  CellField f(g);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = std::sin(1.0 + i);
  const auto path = (dir / "f.raw").string();
  write_cell_field(path, f);
  CHECK(std::filesystem::file_size(path) == 80 + 25 * 8);
  auto back = read_cell_field(path, 2);
  CHECK(back.grid.same_shape(g));
  CHECK(back.values == f.values);

  CellMask m(g.cells(), 0);
  m[3] = 1;
  m[7] = 2;
  write_mask((dir / "m.raw").string(), g, m);
  RawHeader hd;
  auto mb = read_mask((dir / "m.raw").string(), hd);
  CHECK(hd.tag == "LMMASK");
  CHECK(mb == m);

  FaceField u(g, 1.5);
  write_face_component((dir / "u0.raw").string(), u, 0);
  FaceField v(g);
  read_face_component((dir / "u0.raw").string(), v, 0);
  CHECK(v.comp[0] == u.comp[0]);
  std::filesystem::resize_file(path, 100);
  CHECK_THROWS_AS(read_cell_field(path, 2), ShapeError);
}

TEST_CASE("header layout") {
  RawHeader hd{"LMFIELD", "f64", {3, 4, 1}, 0.125, {0, 0, 0}};
  auto s = format_raw_header(hd);
  CHECK(s.size() == 80);
  CHECK(s.back() == '\n');
  auto p = parse_raw_header(s);
  CHECK(p.dims == Index3{3, 4, 1});
  CHECK(p.h == 0.125);
}
