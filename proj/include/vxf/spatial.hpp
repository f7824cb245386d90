#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "vxf/mesh.hpp"

namespace vxf {

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c);

// Median-split AABB tree over mesh triangles for exact nearest-surface queries.
class TriangleBvh {
 public:
  explicit TriangleBvh(const Mesh& mesh);

  // Euclidean distance from p to the mesh surface.
  double distance(const Eigen::Vector3d& p) const;

 private:
  struct Node {
    Eigen::Vector3d lo, hi;
    std::int32_t left = -1, right = -1;  // children, or leaf range below
    std::int32_t first = 0, count = 0;
  };

  std::int32_t build(std::int32_t first, std::int32_t count);

  const Mesh& mesh_;
  std::vector<std::uint32_t> order_;  // triangle ids, partitioned per node
  std::vector<Node> nodes_;
};

// Uniform hash grid over a fixed point set; supports nearest-neighbor and
// fixed-radius k-nearest queries. Ties resolve by smaller point id.
class PointGrid {
 public:
  PointGrid(std::vector<Eigen::Vector3d> points, double cell_size);

  std::size_t size() const { return points_.size(); }
  const Eigen::Vector3d& point(std::size_t i) const { return points_[i]; }

  // Index of the nearest point to p (points_ must be nonempty).
  std::size_t nearest(const Eigen::Vector3d& p) const;
  double nearest_distance(const Eigen::Vector3d& p) const;

  // Up to k nearest point ids within max_radius of p, closest first.
  std::vector<std::size_t> k_nearest_within(const Eigen::Vector3d& p, int k,
                                            double max_radius) const;

 private:
  struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& c) const;
  };

  CellKey cell_of(const Eigen::Vector3d& p) const;

  std::vector<Eigen::Vector3d> points_;
  double cell_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> cells_;
  CellKey cell_lo_{0, 0, 0}, cell_hi_{0, 0, 0};  // populated cell bounds
};

}  // namespace vxf
