#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vxf/mesh.hpp"

using namespace vxf;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path);
  out << contents;
}

}  // namespace

TEST_CASE("single triangle OBJ loads with colors") {
  const auto path = temp_file("vxf_tri.obj");
  write_file(path, "v 0 0 0 1 0 0\nv 1 0 0 0 1 0\nv 0 1 0 0 0 1\nf 1 2 3\n");
  std::filesystem::remove(path.string() + ".sem");
  Mesh m = load_mesh(path.string());
  CHECK(m.vertices.size() == 3);
  CHECK(m.triangles.size() == 1);
  CHECK(m.vertices[0].color == Eigen::Vector3f(1.f, 0.f, 0.f));
  // no sidecar: all faces null
  CHECK(m.face_semantics[0].is_null());
  std::filesystem::remove(path);
}

TEST_CASE("colorless vertices default to mid-gray") {
  const auto path = temp_file("vxf_gray.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  std::filesystem::remove(path.string() + ".sem");
  Mesh m = load_mesh(path.string());
  CHECK(m.vertices[1].color == Eigen::Vector3f(0.5f, 0.5f, 0.5f));
  std::filesystem::remove(path);
}

TEST_CASE("sidecar length mismatch is an error") {
  const auto path = temp_file("vxf_sem.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 4 3\n");
  write_file(path.string() + ".sem", "0\n");
  CHECK_THROWS_AS(load_mesh(path.string()), DataError);
  write_file(path.string() + ".sem", "0\n19\n");
  Mesh m = load_mesh(path.string());
  CHECK(m.face_semantics[1].class_id == 19);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".sem");
}

TEST_CASE("parse errors carry line numbers") {
  const auto path = temp_file("vxf_bad.obj");
  write_file(path, "v 0 0 0\nv 1 0\nf 1 2 3\n");
  CHECK_THROWS_WITH_AS(load_mesh(path.string()), doctest::Contains(":2:"), DataError);
  write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  CHECK_THROWS_WITH_AS(load_mesh(path.string()), doctest::Contains("out of range"), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("synth_scene is deterministic and label-complete") {
  SceneSpec spec;
  spec.rng_seed = 123;
  Mesh a = synth_scene(spec);
  Mesh b = synth_scene(spec);
  REQUIRE(a.vertices.size() == b.vertices.size());
  REQUIRE(a.triangles.size() == b.triangles.size());
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    CHECK(a.vertices[i].position == b.vertices[i].position);
    CHECK(a.vertices[i].color == b.vertices[i].color);
  }
  for (std::size_t f = 0; f < a.triangles.size(); ++f) {
    CHECK(a.triangles[f] == b.triangles[f]);
    CHECK(a.face_semantics[f] == b.face_semantics[f]);
    // every face label is a real taxonomy class
    CHECK(a.face_semantics[f].class_id < kClassCount);
  }

  SceneSpec other = spec;
  other.rng_seed = 124;
  Mesh c = synth_scene(other);
  bool differs = c.vertices.size() != a.vertices.size();
  for (std::size_t i = 0; !differs && i < a.vertices.size(); ++i)
    differs = a.vertices[i].position != c.vertices[i].position ||
              a.vertices[i].color != c.vertices[i].color;
  CHECK(differs);
}

TEST_CASE("building_count=0 removes building faces") {
  SceneSpec spec;
  spec.building_count = 0;
  spec.rng_seed = 5;
  Mesh m = synth_scene(spec);
  for (const SemanticLabel& l : m.face_semantics) CHECK(l.class_id != cls::kBuilding);
  // the scene still has road, lane, and pole faces
  bool road = false, lane = false, pole = false;
  for (const SemanticLabel& l : m.face_semantics) {
    road |= l.class_id == cls::kRoad;
    lane |= l.class_id == cls::kRoadLane;
    pole |= l.class_id == cls::kPole;
  }
  CHECK(road);
  CHECK(lane);
  CHECK(pole);
}

TEST_CASE("mesh saves and reloads") {
  SceneSpec spec;
  spec.building_count = 1;
  spec.pole_count = 1;
  spec.rng_seed = 99;
  Mesh m = synth_scene(spec);
  const auto path = temp_file("vxf_scene.obj");
  save_mesh(m, path.string());
  Mesh back = load_mesh(path.string());
  REQUIRE(back.vertices.size() == m.vertices.size());
  REQUIRE(back.triangles.size() == m.triangles.size());
  for (std::size_t f = 0; f < m.triangles.size(); ++f)
    CHECK(back.face_semantics[f] == m.face_semantics[f]);
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    CHECK((back.vertices[i].position - m.vertices[i].position).norm() < 1e-7);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".sem");
}
