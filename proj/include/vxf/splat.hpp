#pragma once

#include <Eigen/Core>
#include <vector>

#include "vxf/types.hpp"

namespace vxf {

// Surface-aligned 2D Gaussian disk. rotation is orthonormal with det +1;
// its first two columns span the tangent plane, the third is the normal.
struct Splat {
  Eigen::Vector3d center;     // world, meters
  Eigen::Matrix3d rotation;
  double radius = 0.04;       // meters
  Eigen::Vector3f color;      // [0,1]
};

struct NormalEstimate {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  bool degenerate = false;  // covariance rank < 2; fell back to +z
};

// Smallest-eigenvalue direction of the neighbor covariance (PCA normal).
// Needs >= 3 neighbors; collinear or coincident neighborhoods take the
// fallback path.
NormalEstimate estimate_normal(const Eigen::Vector3d& point,
                               const std::vector<Eigen::Vector3d>& neighbors);

struct SplatBuildOptions {
  double radius = 0.04;          // fixed splat radius, meters
  int k_neighbors = 16;          // PCA neighborhood size
  double neighbor_radius = 1.2;  // PCA neighborhood ball, 2 * v_s
};

// One splat per stored sample, in grid iteration order (deterministic).
std::vector<Splat> build_splats(const VoxfieldGrid& grid,
                                const SplatBuildOptions& options = {});

}  // namespace vxf
