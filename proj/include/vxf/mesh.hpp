#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "vxf/types.hpp"

namespace vxf {

struct MeshVertex {
  Eigen::Vector3d position;  // meters
  Eigen::Vector3f color;     // [0,1]
};

// Colored triangle mesh with one semantic label per face.
struct Mesh {
  std::vector<MeshVertex> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<SemanticLabel> face_semantics;

  std::size_t face_count() const { return triangles.size(); }
  double face_area(std::size_t f) const;
  double total_area() const;
  void validate() const;  // index ranges, |face_semantics| == |triangles|
};

// OBJ with the vertex-color extension ("v x y z r g b"; colors default to
// mid-gray when absent). A sidecar "<path>.sem" with one class id per face
// supplies semantics; if missing, all faces are labeled null.
Mesh load_mesh(const std::string& path);

void save_mesh(const Mesh& mesh, const std::string& path, bool write_sidecar = true);

// Procedural toy street scene: a ground quad labeled road, periodic lane
// stripes, axis-aligned building boxes, and thin vertical pole prisms.
// Deterministic for a fixed seed.
struct SceneSpec {
  double extent = 24.0;             // meters per horizontal axis
  double road_width = 7.0;          // meters
  double lane_stripe_period = 4.0;  // meters
  int building_count = 6;
  int pole_count = 8;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

Mesh synth_scene(const SceneSpec& spec);

}  // namespace vxf
