#pragma once

#include <cstdint>

#include "vxf/mesh.hpp"
#include "vxf/types.hpp"

namespace vxf {

struct ChamferResult {
  double grid_to_mesh = 0.0;  // mean over grid samples of distance to the surface
  double mesh_to_grid = 0.0;  // mean over surface probes of distance to nearest sample
  double symmetric = 0.0;     // average of the two
};

// Symmetric Chamfer distance between the grid's sample points and the mesh
// surface. Deterministic for a fixed probe seed.
ChamferResult chamfer_distance(const VoxfieldGrid& grid, const Mesh& mesh, int probe_count,
                               std::uint64_t probe_seed = 0);

}  // namespace vxf
