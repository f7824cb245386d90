#pragma once

#include <Eigen/Core>
#include <set>
#include <vector>

#include "vxf/mesh.hpp"
#include "vxf/types.hpp"

namespace vxf {

// Vertex of a clipped polygon; color rides along through clipping so
// sampled points can interpolate it exactly (color is affine on the face).
struct ClipVertex {
  Eigen::Vector3d position;
  Eigen::Vector3d color;
};
using ClipPolygon = std::vector<ClipVertex>;

// Sutherland-Hodgman clip of one colored triangle against the closed
// axis-aligned box [lo, hi]. Returns an empty polygon when nothing remains.
ClipPolygon clip_triangle_to_box(const ClipVertex& a, const ClipVertex& b, const ClipVertex& c,
                                 const Eigen::Vector3d& lo, const Eigen::Vector3d& hi);

double polygon_area(const ClipPolygon& poly);

// Exactly the voxels whose box intersects some triangle with positive
// clipped area. Boxes are half-open [min, max) per axis; ownership is
// resolved by floor-based index ranges, so no surface region is assigned
// to two voxels.
std::set<VoxelIndex> voxelize(const Mesh& mesh, float voxel_size,
                              const Eigen::Vector3f& origin = Eigen::Vector3f::Zero());

// n area-uniform samples over the mesh surface clipped to one voxel box,
// colors interpolated barycentrically, label by clipped-area majority
// (ties to the smaller class id). Deterministic for a fixed seed.
std::pair<SigmaVoxfield, SemanticLabel> sample_voxfield(const Mesh& mesh, const VoxelIndex& voxel,
                                                        int n, std::uint64_t rng_seed,
                                                        float voxel_size,
                                                        const Eigen::Vector3f& origin =
                                                            Eigen::Vector3f::Zero());

// voxelize + sample_voxfield over every occupied voxel, with per-voxel
// seeds derived from (rng_seed, i, j, k). Parallel and serial runs build
// identical grids.
VoxfieldGrid build_grid(const Mesh& mesh, float voxel_size, int n, std::uint64_t rng_seed,
                        const Eigen::Vector3f& origin = Eigen::Vector3f::Zero(), int threads = 1);

}  // namespace vxf
