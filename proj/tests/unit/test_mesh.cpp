#include <doctest.h>

#include <fstream>

#include "bronchopt/errors.hpp"
#include "bronchopt/mesh.hpp"
#include "bronchopt/phantom.hpp"
#include "support/helpers.hpp"

using namespace bronchopt;

TEST_CASE("binary stl roundtrip of a unit cube merges duplicate vertices") {
  testing::TempDir dir("stl");
  const AirwayMesh cube = testing::cube_mesh(1.0);
  save_stl(cube, dir.path() / "cube.stl");

  const AirwayMesh loaded = load_mesh(dir.path() / "cube.stl");
  CHECK(loaded.vertices.size() == 8);
  CHECK(loaded.triangles.size() == 12);
  CHECK(loaded.watertight);
}

TEST_CASE("cube with one face removed is not watertight") {
  testing::TempDir dir("stl_open");
  AirwayMesh open_cube = testing::cube_mesh(1.0);
  open_cube.triangles.resize(10);  // drop one quad
  save_stl(open_cube, dir.path() / "open.stl");

  const AirwayMesh loaded = load_mesh(dir.path() / "open.stl");
  CHECK(loaded.triangles.size() == 10);
  CHECK_FALSE(loaded.watertight);
}

TEST_CASE("ascii stl parses") {
  testing::TempDir dir("stl_ascii");
  const auto path = dir.path() / "tri.stl";
  {
    std::ofstream out(path);
    out << "solid tri\n"
           " facet normal 0 0 1\n"
           "  outer loop\n"
           "   vertex 0 0 0\n"
           "   vertex 1 0 0\n"
           "   vertex 0 1 0\n"
           "  endloop\n"
           " endfacet\n"
           "endsolid tri\n";
  }
  const AirwayMesh mesh = load_mesh(path);
  CHECK(mesh.vertices.size() == 3);
  CHECK(mesh.triangles.size() == 1);
  CHECK_FALSE(mesh.watertight);
}

TEST_CASE("obj parses faces with slash references and fans polygons") {
  testing::TempDir dir("obj");
  const auto path = dir.path() / "quad.obj";
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
           "f 1/1 2/2 3/3 4/4\n";
  }
  const AirwayMesh mesh = load_mesh(path);
  CHECK(mesh.vertices.size() == 4);
  CHECK(mesh.triangles.size() == 2);
}

TEST_CASE("degenerate triangles are dropped during cleaning") {
  testing::TempDir dir("degen");
  AirwayMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.5, 0.5, 0}};
  mesh.triangles = {{0, 1, 2}, {0, 1, 1}, {1, 1, 1}};
  save_stl(mesh, dir.path() / "degen.stl");
  const AirwayMesh loaded = load_mesh(dir.path() / "degen.stl");
  CHECK(loaded.triangles.size() == 1);
}

TEST_CASE("empty mesh is rejected") {
  testing::TempDir dir("empty");
  AirwayMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1e-9, 0, 0}};
  mesh.triangles = {{0, 1, 2}};  // zero area after vertex merging
  save_stl(mesh, dir.path() / "empty.stl");
  CHECK_THROWS_AS(load_mesh(dir.path() / "empty.stl"), EmptyMesh);
}

TEST_CASE("malformed file raises ParseError") {
  testing::TempDir dir("bad");
  const auto path = dir.path() / "bad.obj";
  {
    std::ofstream out(path);
    out << "v 0 0\n";  // missing coordinate
  }
  CHECK_THROWS_AS(load_mesh(path), ParseError);
}

TEST_CASE("cylinder tessellation counts match the generator formula") {
  PhantomParams params;
  params.segments = 64;
  const Phantom phantom = make_phantom("cylinder", params);
  // ring vertices top+bottom plus two cap centers; 2S wall + 2S cap triangles
  CHECK(phantom.mesh.vertices.size() == 2 * 64 + 2);
  CHECK(phantom.mesh.triangles.size() == 4 * 64);
  CHECK(phantom.mesh.watertight);
}
